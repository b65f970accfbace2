#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "matwaring/block_triangular.hpp"
#include "matwaring/canon.hpp"
#include "matwaring/freealg.hpp"
#include "matwaring/linalg.hpp"
#include "matwaring/unitaries.hpp"

namespace matwaring::waring {

using linalg::SimilarityCertificate;

enum class Mode { FourTerm, TwoTerm, FiveTerm };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::FourTerm: return "FourTerm";
    case Mode::TwoTerm: return "TwoTerm";
    case Mode::FiveTerm: return "FiveTerm";
  }
  return "Unknown";
}

/// One similarity in the chain. `term` is the 0-based output term the
/// certificate maps the witness onto, or -1 for an intermediate step.
struct Step {
  std::string name;
  int term = -1;
  SimilarityCertificate cert;
};

struct WaringCertificate {
  Mode mode = Mode::FourTerm;
  std::string polynomial;  // printed canonical form; empty for bare matrix decompositions
  Index n = 0;
  CMatrix witnessB;
  std::vector<CMatrix> witnessArgs;
  /// Five-term only: the nonzero-trace image point and its arguments.
  CMatrix traceWitness;
  std::vector<CMatrix> traceArgs;
  std::vector<std::vector<CMatrix>> tuples;
  std::vector<CMatrix> terms;  // f(tuple_i), or the similar matrices themselves without f
  std::vector<Complex> coefficients;
  CMatrix target;
  double residual = 0.0;
  std::vector<Step> steps;
  Tolerances tolerances;
};

inline CMatrix weighted_sum(std::span<const CMatrix> terms, std::span<const Complex> coeffs, Index n) {
  CMatrix s = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < terms.size(); ++i) s += coeffs[i] * terms[i];
  return s;
}

inline bool is_traceless(const CMatrix& a, const Tolerances& tol) {
  return std::abs(a.trace()) <= tol.hollowTol * std::max(1.0, a.norm());
}

// ---------------------------------------------------------------------------
// Difference of two similar matrices

struct DiffOfSimilar {
  CMatrix Bp;
  CMatrix Bpp;
  SimilarityCertificate toBp;   // blkdiag(blocks) -> Bp
  SimilarityCertificate toBpp;  // blkdiag(blocks) -> Bpp
};

/// C = Bp - Bpp with Bp = D + (strict block upper part of C) and
/// Bpp = D - (strict block lower part of C), D = blkdiag(partition blocks).
/// Both are similar to D because the block spectra are disjoint.
inline DiffOfSimilar diff_of_similar(const canon::SpectralPartition& partition, const CMatrix& c,
                                     const Tolerances& tol = {}) {
  const auto off = block_offsets(partition.blockSizes);
  const Index n = off.back();
  if (c.rows() != n || c.cols() != n) throw Error(ErrorKind::DimensionMismatch, "C does not match the partition size");
  const auto k = static_cast<Index>(partition.blockSizes.size());
  CMatrix upper = CMatrix::Zero(n, n);
  CMatrix lower = CMatrix::Zero(n, n);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) {
      const auto blk = c.block(off[i], off[j], partition.blockSizes[i], partition.blockSizes[j]);
      if (i == j) {
        if (blk.size() > 0 && blk.cwiseAbs().maxCoeff() != 0.0)
          throw Error(ErrorKind::InvalidPattern, "C has a nonzero diagonal block");
      } else {
        (j > i ? upper : lower).block(off[i], off[j], blk.rows(), blk.cols()) = blk;
      }
    }
  const CMatrix d = linalg::block_diag(partition.blocks);
  DiffOfSimilar out;
  out.Bp = d + upper;
  out.Bpp = d - lower;
  out.toBp = block_triangular_similarity(partition.blocks, upper, Orientation::Upper, tol);
  out.toBpp = block_triangular_similarity(partition.blocks, -lower, Orientation::Lower, tol);
  return out;
}

// ---------------------------------------------------------------------------
// Four-term decomposition of a traceless matrix

struct FourTerm {
  std::array<CMatrix, 4> terms;                     // A = t0 - t1 + t2 - t3
  std::array<SimilarityCertificate, 4> fromWitness;  // B -> terms[i]
  std::vector<Step> steps;                           // intermediate steps, then the four chains
  double residual = 0.0;                             // ||A - (t0 - t1 + t2 - t3)||_F
};

inline const std::array<Complex, 4>& four_term_signs() {
  static const std::array<Complex, 4> s{Complex(1, 0), Complex(-1, 0), Complex(1, 0), Complex(-1, 0)};
  return s;
}

/// A = B' - B'' + B''' - B'''' with every term similar to B. Requires every
/// eigenvalue cluster of B to have multiplicity <= n/2 and tr A = 0.
inline FourTerm four_term_decompose(const CMatrix& b, const CMatrix& a, const Tolerances& tol = {}) {
  const Index n = b.rows();
  if (b.cols() != n || a.rows() != n || a.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "four_term_decompose: B and A must be square of equal size");
  if (!is_traceless(a, tol)) throw Error(ErrorKind::NonzeroTrace, "four_term_decompose needs a traceless A");

  FourTerm out;
  if (a.cwiseAbs().maxCoeff() == 0.0) {
    for (int i = 0; i < 4; ++i) {
      out.terms[static_cast<std::size_t>(i)] = b;
      out.fromWitness[static_cast<std::size_t>(i)] = linalg::identity_certificate(b);
      out.steps.push_back({"term" + std::to_string(i + 1), i, out.fromWitness[static_cast<std::size_t>(i)]});
    }
    return out;
  }

  const auto part = canon::partition_spectrum(b, tol);
  const auto hollow = canon::zero_diagonal_similarity(a, tol);
  const unitaries::BlockPattern pattern{part.blockSizes};
  const auto split = unitaries::split_hollow(hollow.M, pattern, tol);
  const auto d1 = diff_of_similar(part, split.C1, tol);
  const auto d2 = diff_of_similar(part, split.C2, tol);

  const CMatrix& s = hollow.toHollow.T;        // M = S A S^-1
  const CMatrix& sinv = hollow.toHollow.Tinv;
  const CMatrix& u = split.U;
  const auto b_to_d = linalg::invert(part.toBlockDiag);

  // Each term: B -> D -> (triangular assembly) [-> U conjugation] -> S^-1 conjugation.
  const std::array<const SimilarityCertificate*, 4> tri{&d1.toBp, &d1.toBpp, &d2.toBp, &d2.toBpp};
  for (std::size_t i = 0; i < 4; ++i) {
    const CMatrix& x = tri[i]->to;
    CMatrix inner = x;
    auto chain = compose(*tri[i], b_to_d);
    if (i >= 2) {
      inner = u * x * u.adjoint();
      chain = compose(linalg::make_certificate(u, u.adjoint(), x, inner), chain);
    }
    out.terms[i] = sinv * inner * s;
    chain = compose(linalg::make_certificate(sinv, s, inner, out.terms[i]), chain);
    linalg::require_valid(chain, tol.certTol, "four_term_decompose term " + std::to_string(i + 1));
    out.fromWitness[i] = std::move(chain);
  }

  out.steps.push_back({"partition", -1, part.toBlockDiag});
  out.steps.push_back({"hollow", -1, hollow.toHollow});
  out.steps.push_back({"triangular_upper_C1", -1, d1.toBp});
  out.steps.push_back({"triangular_lower_C1", -1, d1.toBpp});
  out.steps.push_back({"triangular_upper_C2", -1, d2.toBp});
  out.steps.push_back({"triangular_lower_C2", -1, d2.toBpp});
  for (int i = 0; i < 4; ++i)
    out.steps.push_back({"term" + std::to_string(i + 1), i, out.fromWitness[static_cast<std::size_t>(i)]});

  out.residual = (a - weighted_sum(out.terms, four_term_signs(), n)).norm();
  if (out.residual > tol.endTol * std::max(1.0, a.norm()))
    throw Error(ErrorKind::ResidualTooLarge, "four_term_decompose residual " + std::to_string(out.residual));
  return out;
}

/// Matrix-level certificate (no polynomial): terms are the four similar matrices.
inline WaringCertificate four_term_certificate(const CMatrix& b, const CMatrix& a, const Tolerances& tol = {}) {
  auto ft = four_term_decompose(b, a, tol);
  WaringCertificate c;
  c.mode = Mode::FourTerm;
  c.n = b.rows();
  c.witnessB = b;
  c.terms.assign(ft.terms.begin(), ft.terms.end());
  c.coefficients.assign(four_term_signs().begin(), four_term_signs().end());
  c.target = a;
  c.residual = ft.residual;
  c.steps = std::move(ft.steps);
  c.tolerances = tol;
  return c;
}

// ---------------------------------------------------------------------------
// Witness search

enum class Goal { MultiplicityHalf, DistinctEigs, NonzeroTrace };

inline const char* to_string(Goal g) {
  switch (g) {
    case Goal::MultiplicityHalf: return "MultiplicityHalf";
    case Goal::DistinctEigs: return "DistinctEigs";
    case Goal::NonzeroTrace: return "NonzeroTrace";
  }
  return "Unknown";
}

struct ImageWitness {
  CMatrix B;
  std::vector<CMatrix> args;
  std::uint64_t sampleIndex = 0;
};

constexpr std::uint32_t kSearchStream = 0x73726368;  // "srch"

inline bool satisfies(const CMatrix& b, Goal goal, const Tolerances& tol) {
  const Index n = b.rows();
  switch (goal) {
    case Goal::NonzeroTrace:
      return b.norm() > 0.0 && std::abs(b.trace()) > tol.traceTol * b.norm();
    case Goal::DistinctEigs: {
      const auto eig = linalg::eigenvalues(b);
      const double scale = linalg::spectral_scale(eig);
      for (std::size_t i = 0; i < eig.size(); ++i)
        for (std::size_t j = i + 1; j < eig.size(); ++j)
          if (std::abs(eig[i] - eig[j]) <= tol.gapTol * scale) return false;
      return b.norm() > 0.0 || n == 1;
    }
    case Goal::MultiplicityHalf: {
      if (b.norm() == 0.0) return false;
      const auto eig = linalg::eigenvalues(b);
      for (const auto& c : canon::cluster_eigenvalues(eig, tol.clusterTol))
        if (2 * c.multiplicity > n) return false;
      return true;
    }
  }
  return false;
}

/// The lowest sample index in [0, budget) whose image satisfies `goal`.
/// Sample i draws from its own generator sample_rng(seed, kSearchStream, i),
/// so the answer does not depend on how indices are scheduled.
inline ImageWitness image_search(const freealg::NcPolynomial& f, Index n, Goal goal, int budget, std::uint64_t seed,
                                 const Tolerances& tol = {}) {
  if (budget < 1) throw Error(ErrorKind::InvalidParameter, "budget must be >= 1");
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "n must be >= 1");
  const int m = f.num_vars();
  for (int i = 0; i < budget; ++i) {
    auto rng = sample_rng(seed, kSearchStream, static_cast<std::uint64_t>(i));
    auto args = freealg::random_tuple(m, n, rng);
    CMatrix b = freealg::evaluate(f, args, n);
    if (satisfies(b, goal, tol)) return {std::move(b), std::move(args), static_cast<std::uint64_t>(i)};
  }
  const auto verdict = freealg::classify(f, n, {.seed = seed});
  throw Error(ErrorKind::BudgetExhausted, std::string("no ") + to_string(goal) + " image point in " +
                                              std::to_string(budget) + " samples (classify: " +
                                              freealg::to_string(verdict) + ")");
}

// ---------------------------------------------------------------------------
// Polynomial pipelines

struct RunOptions {
  int budget = 1000;
  std::uint64_t seed = 0;
  Tolerances tol;
};

inline void require_waring_polynomial(const freealg::NcPolynomial& f, Index n, const RunOptions& opt) {
  const auto verdict = freealg::classify(f, n, {.seed = opt.seed});
  if (!verdict.admits_waring())
    throw Error(ErrorKind::NotGeneric, "polynomial is " + freealg::to_string(verdict) + " on " + std::to_string(n) +
                                           "x" + std::to_string(n) + " matrices");
}

inline std::vector<CMatrix> conjugate_tuple(std::span<const CMatrix> args, const SimilarityCertificate& c) {
  std::vector<CMatrix> out;
  out.reserve(args.size());
  for (const auto& a : args) out.push_back(c.T * a * c.Tinv);
  return out;
}

/// Attaches tuples T_i a T_i^-1 for every step with a term index, replaces
/// the terms by f evaluated on those tuples, and recomputes the residual.
inline void attach_tuples(WaringCertificate& c, const freealg::NcPolynomial& f, std::span<const CMatrix> args) {
  c.tuples.assign(c.terms.size(), {});
  for (const auto& s : c.steps)
    if (s.term >= 0) c.tuples[static_cast<std::size_t>(s.term)] = conjugate_tuple(args, s.cert);
  for (std::size_t i = 0; i < c.tuples.size(); ++i) c.terms[i] = freealg::evaluate(f, c.tuples[i], c.n);
  c.residual = (c.target - weighted_sum(c.terms, c.coefficients, c.n)).norm();
}

inline void require_residual(const WaringCertificate& c, const char* what) {
  if (c.residual > c.tolerances.endTol * std::max(1.0, c.target.norm()))
    throw Error(ErrorKind::ResidualTooLarge, std::string(what) + " residual " + std::to_string(c.residual));
}

/// A = f(t1) - f(t2) + f(t3) - f(t4) for f neither an identity nor central.
inline WaringCertificate waring_express(const freealg::NcPolynomial& f, const CMatrix& a, const RunOptions& opt = {}) {
  const Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "target must be square");
  if (!is_traceless(a, opt.tol)) throw Error(ErrorKind::NonzeroTrace, "waring_express needs a traceless target");
  require_waring_polynomial(f, n, opt);
  const auto w = image_search(f, n, Goal::MultiplicityHalf, opt.budget, opt.seed, opt.tol);
  auto c = four_term_certificate(w.B, a, opt.tol);
  c.polynomial = freealg::to_string(f);
  c.witnessArgs = w.args;
  attach_tuples(c, f, w.args);
  require_residual(c, "waring_express");
  return c;
}

inline bool is_prime(Index n) {
  if (n < 2) return false;
  for (Index d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// A = f(t1) - f(t2) when n is prime or f is multilinear.
inline WaringCertificate two_term_decompose(const freealg::NcPolynomial& f, const CMatrix& a, const RunOptions& opt = {}) {
  const Index n = a.rows();
  const Tolerances& tol = opt.tol;
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "target must be square");
  if (!is_prime(n) && !f.is_multilinear())
    throw Error(ErrorKind::PreconditionUnmet, "two-term mode needs n prime or f multilinear; use four-term mode instead");
  if (!is_traceless(a, tol)) throw Error(ErrorKind::NonzeroTrace, "two_term_decompose needs a traceless target");
  require_waring_polynomial(f, n, opt);

  const auto w = image_search(f, n, Goal::DistinctEigs, opt.budget, opt.seed, tol);
  const auto eig = linalg::eigendecompose(w.B, tol).eigenvalues;
  std::vector<canon::Cluster> singles;
  for (Index i = 0; i < n; ++i) singles.push_back({eig[static_cast<std::size_t>(i)], 1, {i}});
  const auto diag = canon::block_diagonalize_by_cluster(w.B, singles, tol);  // B = T Lambda T^-1
  const auto b_to_lambda = linalg::invert(diag.cert);

  CMatrix m = CMatrix::Zero(n, n);
  linalg::SimilarityCertificate to_hollow;
  if (a.cwiseAbs().maxCoeff() != 0.0) {
    const auto hollow = canon::zero_diagonal_similarity(a, tol);
    m = hollow.M;
    to_hollow = hollow.toHollow;
  } else {
    to_hollow = linalg::identity_certificate(a);
  }
  const CMatrix& s = to_hollow.T;
  const CMatrix& sinv = to_hollow.Tinv;
  m.diagonal().setZero();  // hollow up to hollowTol; the terms below keep exactly lambda on the diagonal
  const CMatrix up = m.triangularView<Eigen::StrictlyUpper>();
  const CMatrix low = m.triangularView<Eigen::StrictlyLower>();

  WaringCertificate c;
  c.mode = Mode::TwoTerm;
  c.polynomial = freealg::to_string(f);
  c.n = n;
  c.witnessB = w.B;
  c.witnessArgs = w.args;
  c.coefficients = {Complex(1, 0), Complex(-1, 0)};
  c.target = a;
  c.tolerances = tol;
  c.steps.push_back({"diagonalize", -1, diag.cert});
  c.steps.push_back({"hollow", -1, to_hollow});
  const std::array<std::pair<const CMatrix*, Orientation>, 2> parts{{{&up, Orientation::Upper}, {&low, Orientation::Lower}}};
  for (std::size_t i = 0; i < 2; ++i) {
    const CMatrix off = i == 0 ? *parts[i].first : CMatrix(-*parts[i].first);
    const auto tri = block_triangular_similarity(diag.blocks, off, parts[i].second, tol);
    c.steps.push_back({i == 0 ? "triangular_upper" : "triangular_lower", -1, tri});
    CMatrix term = sinv * tri.to * s;
    auto chain = compose(linalg::make_certificate(sinv, s, tri.to, term), compose(tri, b_to_lambda));
    linalg::require_valid(chain, tol.certTol, "two_term_decompose term " + std::to_string(i + 1));
    c.terms.push_back(std::move(term));
    c.steps.push_back({"term" + std::to_string(i + 1), static_cast<int>(i), std::move(chain)});
  }
  attach_tuples(c, f, w.args);
  require_residual(c, "two_term_decompose");
  return c;
}

/// T = c0 f(a0) + f(t1) - f(t2) + f(t3) - f(t4) for arbitrary T, where f(a0)
/// has nonzero trace.
inline WaringCertificate five_term_express(const freealg::NcPolynomial& f, const CMatrix& t, const RunOptions& opt = {}) {
  const Index n = t.rows();
  if (t.cols() != n) throw Error(ErrorKind::DimensionMismatch, "target must be square");
  require_waring_polynomial(f, n, opt);
  const auto tw = image_search(f, n, Goal::NonzeroTrace, opt.budget, opt.seed, opt.tol);
  const Complex c0 = t.trace() / tw.B.trace();
  CMatrix rest = t - c0 * tw.B;
  rest.diagonal().array() -= rest.trace() / static_cast<double>(n);  // remove rounding in the trace

  RunOptions inner = opt;
  inner.seed = opt.seed + 1;
  auto c = waring_express(f, rest, inner);
  c.mode = Mode::FiveTerm;
  c.target = t;
  c.traceWitness = tw.B;
  c.traceArgs = tw.args;
  c.tuples.insert(c.tuples.begin(), tw.args);
  c.terms.insert(c.terms.begin(), freealg::evaluate(f, tw.args, n));
  c.coefficients.insert(c.coefficients.begin(), c0);
  for (auto& s : c.steps)
    if (s.term >= 0) ++s.term;
  c.residual = (t - weighted_sum(c.terms, c.coefficients, n)).norm();
  require_residual(c, "five_term_express");
  return c;
}

}  // namespace matwaring::waring
