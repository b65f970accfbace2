#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/QR>

#include "matwaring/block_triangular.hpp"
#include "matwaring/linalg.hpp"

namespace matwaring::canon {

struct Cluster {
  Complex value;               // mean of the members
  Index multiplicity = 0;
  std::vector<Index> members;  // indices into the clustered eigenvalue list
};

/// Single-linkage clustering: |l_i - l_j| <= tol * max|l| joins i and j.
/// Clusters are returned in order of their first member.
inline std::vector<Cluster> cluster_eigenvalues(std::span<const Complex> eigs, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "cluster tolerance must be positive");
  const auto n = static_cast<Index>(eigs.size());
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  const double radius = tol * linalg::spectral_scale(eigs);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(eigs[static_cast<std::size_t>(i)] - eigs[static_cast<std::size_t>(j)]) <= radius) {
        const Index a = find(i), b = find(j);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }

  std::vector<Cluster> out;
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const Index root = find(i);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<Index>(out.size());
      out.push_back({});
    }
    auto& c = out[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])];
    c.members.push_back(i);
    c.value += eigs[static_cast<std::size_t>(i)];
    ++c.multiplicity;
  }
  for (auto& c : out) c.value /= static_cast<double>(c.multiplicity);
  return out;
}

namespace detail {

// Swap the adjacent diagonal entries k, k+1 of the Schur form T (A = Q T Q*).
inline void swap_schur(CMatrix& t, CMatrix& q, Index k) {
  const Complex a = t(k, k);
  const Complex c = t(k + 1, k + 1);
  // (t_{k,k+1}, c - a) is the eigenvector of the 2x2 block for eigenvalue c.
  Complex x1 = t(k, k + 1);
  Complex x2 = c - a;
  const double nrm = std::hypot(std::abs(x1), std::abs(x2));
  if (nrm == 0.0) return;
  x1 /= nrm;
  x2 /= nrm;
  Eigen::Matrix2cd g;
  g << x1, -std::conj(x2), x2, std::conj(x1);
  t.middleCols(k, 2) = (t.middleCols(k, 2) * g).eval();
  t.middleRows(k, 2) = (g.adjoint() * t.middleRows(k, 2)).eval();
  q.middleCols(k, 2) = (q.middleCols(k, 2) * g).eval();
  t(k + 1, k) = Complex(0.0, 0.0);
  t(k, k) = c;
  t(k + 1, k + 1) = a;
}

}  // namespace detail

struct BlockDiagonalization {
  std::vector<CMatrix> blocks;
  linalg::SimilarityCertificate cert;  // B = T blkdiag(blocks) T^-1
};

/// Reorders the Schur form so that each cluster is contiguous (in the given
/// cluster order), then removes the off-diagonal coupling with
/// block_triangular_similarity.
inline BlockDiagonalization block_diagonalize_by_cluster(const CMatrix& b, std::span<const Cluster> clusters,
                                                         const Tolerances& tol = {}) {
  const Index n = b.rows();
  auto schur = linalg::eigendecompose(b, tol);
  CMatrix t = schur.schurForm;
  CMatrix q = schur.schurUnitary;

  Index total = 0;
  for (const auto& c : clusters) total += c.multiplicity;
  if (total != n) throw Error(ErrorKind::DimensionMismatch, "cluster multiplicities do not sum to n");

  // Label each Schur eigenvalue with the cluster holding its nearest member.
  std::vector<std::vector<Complex>> member_values(clusters.size());
  {
    const auto& eig = schur.eigenvalues;
    for (std::size_t ci = 0; ci < clusters.size(); ++ci)
      for (Index m : clusters[ci].members)
        member_values[ci].push_back(m < static_cast<Index>(eig.size()) ? eig[static_cast<std::size_t>(m)] : clusters[ci].value);
  }
  auto label_of = [&](Complex z) {
    std::size_t best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < clusters.size(); ++ci)
      for (const auto& v : member_values[ci]) {
        const double d = std::abs(z - v);
        if (d < bestd) bestd = d, best = ci;
      }
    return best;
  };
  std::vector<std::size_t> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = label_of(t(i, i));
  std::vector<Index> counts(clusters.size(), 0);
  for (auto l : labels) ++counts[l];
  for (std::size_t ci = 0; ci < clusters.size(); ++ci)
    if (counts[ci] != clusters[ci].multiplicity)
      throw Error(ErrorKind::ClusterGapTooSmall, "Schur eigenvalues do not match the supplied clusters");

  const double scale = linalg::spectral_scale(schur.eigenvalues);
  for (std::size_t a = 0; a < clusters.size(); ++a)
    for (std::size_t c = a + 1; c < clusters.size(); ++c) {
      const double g = linalg::min_gap(member_values[a], member_values[c]);
      if (g <= tol.gapTol * scale)
        throw Error(ErrorKind::ClusterGapTooSmall, "clusters " + std::to_string(a) + " and " + std::to_string(c) +
                                                       " are only " + std::to_string(g) + " apart");
    }

  // Bubble sort by label with adjacent Schur swaps.
  for (Index pass = 0; pass < n; ++pass) {
    bool swapped = false;
    for (Index k = 0; k + 1 < n; ++k)
      if (labels[static_cast<std::size_t>(k)] > labels[static_cast<std::size_t>(k + 1)]) {
        detail::swap_schur(t, q, k);
        std::swap(labels[static_cast<std::size_t>(k)], labels[static_cast<std::size_t>(k + 1)]);
        swapped = true;
      }
    if (!swapped) break;
  }

  std::vector<Index> sizes;
  for (const auto& c : clusters) sizes.push_back(c.multiplicity);
  const auto off = waring::block_offsets(sizes);
  BlockDiagonalization out;
  CMatrix coupling = t;
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    const Index o = off[ci], s = sizes[ci];
    out.blocks.push_back(t.block(o, o, s, s));
    coupling.block(o, o, s, s).setZero();
  }
  // T = blkdiag + coupling, coupling strictly block upper.
  const auto tri = waring::block_triangular_similarity(out.blocks, coupling, waring::Orientation::Upper, tol);
  out.cert = linalg::make_certificate(q * tri.T, tri.Tinv * q.adjoint(), tri.from, b);
  linalg::require_valid(out.cert, tol.certTol, "block_diagonalize_by_cluster");
  return out;
}

// ---------------------------------------------------------------------------
// Spectral partition

enum class PartitionCase { A, B };

struct SpectralPartition {
  PartitionCase caseTag = PartitionCase::A;
  std::vector<Index> blockSizes;  // (p, q) or (p, q, r)
  std::vector<CMatrix> blocks;
  std::vector<std::vector<Complex>> blockSpectra;
  linalg::SimilarityCertificate toBlockDiag;  // B = T blkdiag(blocks) T^-1
};

/// Block-diagonalizes B into two n/2 blocks with disjoint spectra (case A) or
/// three blocks each smaller than n/2 (case B). Every eigenvalue cluster must
/// have multiplicity <= n/2.
inline SpectralPartition partition_spectrum(const CMatrix& b, const Tolerances& tol = {}) {
  const Index n = b.rows();
  if (b.cols() != n) throw Error(ErrorKind::DimensionMismatch, "partition_spectrum needs a square matrix");
  const auto eig = linalg::eigendecompose(b, tol).eigenvalues;
  auto clusters = cluster_eigenvalues(eig, tol.clusterTol);
  for (const auto& c : clusters)
    if (2 * c.multiplicity > n)
      throw Error(ErrorKind::MultiplicityTooLarge, "eigenvalue (" + std::to_string(c.value.real()) + "," +
                                                       std::to_string(c.value.imag()) + ") has multiplicity " +
                                                       std::to_string(c.multiplicity) + " > n/2");

  // Deterministic cluster order: larger multiplicity first, then by value.
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
    if (x.multiplicity != y.multiplicity) return x.multiplicity > y.multiplicity;
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });

  std::vector<std::vector<std::size_t>> groups;  // cluster indices per block
  SpectralPartition part;
  const bool even = n % 2 == 0;
  const auto single = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) { return even && 2 * c.multiplicity == n; });
  if (single != clusters.end()) {
    const auto s = static_cast<std::size_t>(single - clusters.begin());
    std::rotate(clusters.begin(), clusters.begin() + static_cast<std::ptrdiff_t>(s), clusters.begin() + static_cast<std::ptrdiff_t>(s) + 1);
    part.caseTag = PartitionCase::A;
    groups = {{0}, {}};
    for (std::size_t i = 1; i < clusters.size(); ++i) groups[1].push_back(i);
  } else {
    // Maximal prefix of size <= n/2.
    std::size_t j = 0;
    Index prefix = 0;
    while (j < clusters.size() && 2 * (prefix + clusters[j].multiplicity) <= n) prefix += clusters[j++].multiplicity;
    if (2 * prefix == n) {
      part.caseTag = PartitionCase::A;
      groups = {{}, {}};
      for (std::size_t i = 0; i < clusters.size(); ++i) groups[i < j ? 0 : 1].push_back(i);
    } else {
      part.caseTag = PartitionCase::B;
      groups = {{}, {j}, {}};
      for (std::size_t i = 0; i < clusters.size(); ++i)
        if (i < j) groups[0].push_back(i);
        else if (i > j) groups[2].push_back(i);
    }
  }

  // Flatten to cluster order and block diagonalize per cluster.
  std::vector<Cluster> ordered;
  for (const auto& g : groups)
    for (auto ci : g) ordered.push_back(clusters[ci]);
  const auto bd = block_diagonalize_by_cluster(b, ordered, tol);

  std::size_t next = 0;
  for (const auto& g : groups) {
    std::vector<CMatrix> parts;
    std::vector<Complex> spectrum;
    for (std::size_t k = 0; k < g.size(); ++k, ++next) {
      parts.push_back(bd.blocks[next]);
      for (Index m : ordered[next].members) spectrum.push_back(eig[static_cast<std::size_t>(m)]);
    }
    part.blocks.push_back(linalg::block_diag(parts));
    part.blockSizes.push_back(part.blocks.back().rows());
    part.blockSpectra.push_back(std::move(spectrum));
  }
  part.toBlockDiag = bd.cert;

  if (part.caseTag == PartitionCase::B)
    for (Index s : part.blockSizes)
      if (2 * s >= n) throw Error(ErrorKind::InvalidPattern, "case B block is not smaller than n/2");
  return part;
}

// ---------------------------------------------------------------------------
// Zero-diagonal similarity

struct HollowForm {
  CMatrix M;
  linalg::SimilarityCertificate toHollow;  // M = S A S^-1 with S = toHollow.T
};

namespace detail {

// Unit vector v, not an eigenvector of A, minimizing |<v, Av>| / ||Av||;
// coordinate vectors first, then normalized pairs e_i +- e_j, e_i +- i e_j.
inline CVector deflation_vector(const CMatrix& a) {
  const Index n = a.rows();
  CVector best = CVector::Unit(n, 0);
  double best_score = std::numeric_limits<double>::infinity();
  auto consider = [&](const CVector& v) {
    const CVector av = a * v;
    const double nav = av.norm();
    const double score = nav == 0.0 ? 0.0 : std::abs(v.dot(av)) / nav;
    if (score < best_score) best_score = score, best = v;
  };
  for (Index k = 0; k < n; ++k) consider(CVector::Unit(n, k));
  if (best_score > 0.5) {
    const double h = 1.0 / std::sqrt(2.0);
    const Complex units[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        for (const auto& u : units) {
          CVector v = CVector::Zero(n);
          v(i) = h;
          v(j) = h * u;
          consider(v);
        }
  }
  return best;
}

}  // namespace detail

/// Similarity to a matrix with zero diagonal, by recursive deflation: pick v
/// with v, Av independent, use the basis (v, Av/||Av||, orthonormal rest) so
/// that entry (1,1) vanishes, and recurse on the trailing block.
inline HollowForm zero_diagonal_similarity(const CMatrix& a, const Tolerances& tol = {}) {
  const Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "zero_diagonal_similarity needs a square matrix");
  const double anorm = a.norm();
  if (std::abs(a.trace()) > tol.hollowTol * anorm)
    throw Error(ErrorKind::NonzeroTrace, "|tr A| = " + std::to_string(std::abs(a.trace())));

  CMatrix work = a;                         // current P^-1 A P
  CMatrix P = CMatrix::Identity(n, n);      // accumulated basis
  CMatrix Pinv = CMatrix::Identity(n, n);
  for (Index k = 0; k + 1 < n; ++k) {
    const Index m = n - k;
    const CMatrix block = work.bottomRightCorner(m, m);
    const double bnorm = block.norm();
    if (bnorm == 0.0 || linalg::distance_to_scalars(block) <= tol.hollowTol * bnorm) break;
    if (std::abs(block(0, 0)) <= tol.hollowTol * anorm) continue;

    const CVector v = detail::deflation_vector(block);
    const CVector av = block * v;
    // Basis columns: v, then an orthonormal basis of a complement of v that
    // contains Av. If Av = 0 any orthonormal complement works.
    const bool kernel = av.norm() <= std::numeric_limits<double>::epsilon() * bnorm;
    CMatrix frame(m, kernel ? 1 : 2);
    frame.col(0) = v;
    if (!kernel) frame.col(1) = av;
    Eigen::HouseholderQR<CMatrix> qr(frame);
    const CMatrix qfull = qr.householderQ() * CMatrix::Identity(m, m);
    CMatrix basis(m, m);
    basis.col(0) = v;
    if (kernel) {
      basis.rightCols(m - 1) = qfull.rightCols(m - 1);
    } else {
      basis.col(1) = av / av.norm();
      basis.rightCols(m - 2) = qfull.rightCols(m - 2);
    }
    const CMatrix basis_inv = basis.fullPivLu().inverse();

    CMatrix step = CMatrix::Identity(n, n);
    CMatrix step_inv = CMatrix::Identity(n, n);
    step.bottomRightCorner(m, m) = basis;
    step_inv.bottomRightCorner(m, m) = basis_inv;
    work = (step_inv * work * step).eval();
    P = (P * step).eval();
    Pinv = (step_inv * Pinv).eval();
  }

  HollowForm h;
  h.M = Pinv * a * P;
  h.toHollow = linalg::make_certificate(Pinv, P, a, h.M);
  linalg::require_valid(h.toHollow, tol.certTol, "zero_diagonal_similarity");
  const double mnorm = h.M.norm();
  if (h.M.diagonal().cwiseAbs().maxCoeff() > tol.hollowTol * std::max(mnorm, anorm))
    throw Error(ErrorKind::ResidualTooLarge, "zero_diagonal_similarity left a diagonal entry of size " +
                                                 std::to_string(h.M.diagonal().cwiseAbs().maxCoeff()));
  return h;
}

}  // namespace matwaring::canon
