#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "matwaring/core.hpp"

namespace matwaring::linalg {

// ---------------------------------------------------------------------------
// Similarity certificates

/// Certifies that T * from * Tinv == to. Both T and its inverse are stored
/// explicitly so a third party can re-check the residuals from data alone.
struct SimilarityCertificate {
  CMatrix T;
  CMatrix Tinv;
  CMatrix from;
  CMatrix to;
  double residualInverse = 0.0;    // ||T Tinv - I||_F
  double residualMap = 0.0;        // ||T from Tinv - to||_F
  double conditionEstimate = 1.0;  // ||T||_F ||Tinv||_F

  /// Both type invariants: residualInverse <= certTol and
  /// residualMap <= certTol * conditionEstimate * ||from||_F.
  bool valid(double certTol) const {
    return residualInverse <= certTol && residualMap <= certTol * conditionEstimate * from.norm();
  }
};

inline SimilarityCertificate make_certificate(CMatrix T, CMatrix Tinv, CMatrix from, CMatrix to) {
  SimilarityCertificate c{std::move(T), std::move(Tinv), std::move(from), std::move(to)};
  const Index n = c.T.rows();
  c.residualInverse = (c.T * c.Tinv - CMatrix::Identity(n, n)).norm();
  c.residualMap = (c.T * c.from * c.Tinv - c.to).norm();
  c.conditionEstimate = c.T.norm() * c.Tinv.norm();
  return c;
}

inline SimilarityCertificate identity_certificate(const CMatrix& x) {
  const Index n = x.rows();
  return make_certificate(CMatrix::Identity(n, n), CMatrix::Identity(n, n), x, x);
}

/// first: X -> Y, then second: Y -> Z; the result certifies X -> Z.
inline SimilarityCertificate compose(const SimilarityCertificate& second, const SimilarityCertificate& first) {
  return make_certificate(second.T * first.T, first.Tinv * second.Tinv, first.from, second.to);
}

/// Y -> X from a certificate X -> Y.
inline SimilarityCertificate invert(const SimilarityCertificate& c) {
  return make_certificate(c.Tinv, c.T, c.to, c.from);
}

inline void require_valid(const SimilarityCertificate& c, double certTol, const std::string& what) {
  if (!c.valid(certTol))
    throw Error(ErrorKind::CertificateFailure, what + ": residualInverse=" + std::to_string(c.residualInverse) +
                                                   " residualMap=" + std::to_string(c.residualMap) +
                                                   " cond=" + std::to_string(c.conditionEstimate));
}

// ---------------------------------------------------------------------------
// Schur / eigenvalues

struct EigenResult {
  std::vector<Complex> eigenvalues;
  CMatrix schurForm;
  CMatrix schurUnitary;
};

/// A = Q T Q* with Q unitary and T upper triangular; eigenvalues = diag(T).
inline EigenResult eigendecompose(const CMatrix& a, const Tolerances& tol = {}) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "eigendecompose needs a square matrix");
  Eigen::ComplexSchur<CMatrix> schur(a, true);
  if (schur.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "complex Schur iteration did not converge");
  EigenResult r{{}, schur.matrixT(), schur.matrixU()};
  // ComplexSchur leaves rounding noise below the diagonal.
  r.schurForm.triangularView<Eigen::StrictlyLower>().setZero();
  for (Index i = 0; i < a.rows(); ++i) r.eigenvalues.push_back(r.schurForm(i, i));
  const double back = (a - r.schurUnitary * r.schurForm * r.schurUnitary.adjoint()).norm();
  if (back > tol.backTol * std::max(1.0, a.norm()))
    throw Error(ErrorKind::NonConvergence, "Schur reconstruction residual " + std::to_string(back));
  return r;
}

inline std::vector<Complex> eigenvalues(const CMatrix& a) {
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "eigenvalue iteration did not converge");
  return {es.eigenvalues().data(), es.eigenvalues().data() + a.rows()};
}

inline double spectral_scale(std::span<const Complex> a, std::span<const Complex> b = {}) {
  double s = 0.0;
  for (const auto& z : a) s = std::max(s, std::abs(z));
  for (const auto& z : b) s = std::max(s, std::abs(z));
  return s > 0.0 ? s : 1.0;
}

inline double min_gap(std::span<const Complex> a, std::span<const Complex> b) {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& x : a)
    for (const auto& y : b) g = std::min(g, std::abs(x - y));
  return g;
}

/// Largest distance in a greedy nearest-neighbour matching of two spectra.
inline double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    std::size_t best = b.size();
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]);
      if (d < bestd) bestd = d, best = j;
    }
    used[best] = true;
    worst = std::max(worst, bestd);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sylvester equation A1 X - X A2 = C

/// Bartels-Stewart on complex Schur forms. Requires disjoint spectra.
inline CMatrix sylvester_solve(const CMatrix& a1, const CMatrix& a2, const CMatrix& c, const Tolerances& tol = {}) {
  const Index p = a1.rows();
  const Index q = a2.rows();
  if (a1.cols() != p || a2.cols() != q || c.rows() != p || c.cols() != q)
    throw Error(ErrorKind::DimensionMismatch, "sylvester_solve: A1 p x p, A2 q x q, C p x q expected");
  if (p == 0 || q == 0) return CMatrix::Zero(p, q);

  const auto s1 = eigendecompose(a1, tol);
  const auto s2 = eigendecompose(a2, tol);
  const double gap = min_gap(s1.eigenvalues, s2.eigenvalues);
  if (gap <= tol.gapTol * spectral_scale(s1.eigenvalues, s2.eigenvalues))
    throw Error(ErrorKind::SpectraOverlap, "eigenvalue gap " + std::to_string(gap));

  const CMatrix& t1 = s1.schurForm;
  const CMatrix& t2 = s2.schurForm;
  const CMatrix f = s1.schurUnitary.adjoint() * c * s2.schurUnitary;
  CMatrix y(p, q);
  // Column j: (T1 - t2_jj I) y_j = f_j + sum_{k<j} t2_kj y_k
  for (Index j = 0; j < q; ++j) {
    CVector rhs = f.col(j);
    for (Index k = 0; k < j; ++k) rhs += t2(k, j) * y.col(k);
    CMatrix shifted = t1;
    shifted.diagonal().array() -= t2(j, j);
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  CMatrix x = s1.schurUnitary * y * s2.schurUnitary.adjoint();

  const double res = (a1 * x - x * a2 - c).norm();
  const double scale = (a1.norm() + a2.norm()) * x.norm() + c.norm();
  if (scale > 0.0 && res > tol.solveTol * scale)
    throw Error(ErrorKind::IllConditioned, "Sylvester relative residual " + std::to_string(res / scale));
  return x;
}

// ---------------------------------------------------------------------------
// Subspaces of M_n(C)

struct SubspaceBasis {
  Index n = 0;
  std::vector<CMatrix> basis;
};

/// Column-major vectorization.
inline CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

inline Index numerical_rank(const CMatrix& m, double rankTol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rankTol * sv(0)) ++r;
  return r;
}

/// dim(V1 + V2), from the SVD of the stacked vectorized bases.
inline Index subspace_sum_rank(const SubspaceBasis& v1, const SubspaceBasis& v2, const Tolerances& tol = {}) {
  if (v1.n != v2.n) throw Error(ErrorKind::DimensionMismatch, "subspaces live in different M_n");
  const Index n2 = v1.n * v1.n;
  CMatrix cols(n2, static_cast<Index>(v1.basis.size() + v2.basis.size()));
  Index j = 0;
  for (const auto* v : {&v1, &v2})
    for (const auto& b : v->basis) {
      if (b.rows() != v1.n || b.cols() != v1.n) throw Error(ErrorKind::DimensionMismatch, "basis member has wrong size");
      cols.col(j++) = vec(b);
    }
  return numerical_rank(cols, tol.rankTol);
}

/// The commutator map A -> A M - M A as an n^2 x n^2 matrix on vec(A).
inline CMatrix commutator_operator(const CMatrix& m) {
  const Index n = m.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  // vec(A M) = (M^T kron I) vec(A),  vec(M A) = (I kron M) vec(A)
  CMatrix op(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) op.block(i * n, j * n, n, n) = m(j, i) * id - (i == j ? m : CMatrix::Zero(n, n));
  return op;
}

/// dim { A : A M = M A for every M in mats }.
inline Index joint_commutant_dimension(std::span<const CMatrix> mats, const Tolerances& tol = {}) {
  if (mats.empty()) throw Error(ErrorKind::DimensionMismatch, "joint_commutant_dimension needs at least one matrix");
  const Index n = mats.front().rows();
  CMatrix stacked(static_cast<Index>(mats.size()) * n * n, n * n);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    if (mats[k].rows() != n || mats[k].cols() != n) throw Error(ErrorKind::DimensionMismatch, "matrices differ in size");
    stacked.middleRows(static_cast<Index>(k) * n * n, n * n) = commutator_operator(mats[k]);
  }
  return n * n - numerical_rank(stacked, tol.rankTol);
}

inline CMatrix project_traceless(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "project_traceless needs a square matrix");
  CMatrix r = a;
  r.diagonal().array() -= a.trace() / static_cast<double>(a.rows());
  return r;
}

/// ||M - (tr M / n) I||_F
inline double distance_to_scalars(const CMatrix& m) { return project_traceless(m).norm(); }

inline CMatrix block_diag(std::span<const CMatrix> blocks) {
  Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  CMatrix d = CMatrix::Zero(n, n);
  Index off = 0;
  for (const auto& b : blocks) {
    d.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return d;
}

}  // namespace matwaring::linalg
