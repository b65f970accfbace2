#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "matwaring/block_triangular.hpp"
#include "matwaring/linalg.hpp"

namespace matwaring::unitaries {

// ---------------------------------------------------------------------------
// 2x2 building blocks

enum class Sign { Plus, Minus };

struct ProjectorPair {
  double q = 0.5;
  Sign sign = Sign::Plus;
  Eigen::Matrix2cd matrix;
};

inline void require_open_unit(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::InvalidParameter, std::string(what) + ": q must lie in (0,1)");
}

/// R_q (Plus) or R_q^- (Minus): the rank-one orthogonal projection onto
/// (sqrt q, +-sqrt(1-q)).
inline ProjectorPair make_projector(double q, Sign sign) {
  require_open_unit(q, "make_projector");
  const double off = (sign == Sign::Plus ? 1.0 : -1.0) * std::sqrt(q * (1.0 - q));
  ProjectorPair p{q, sign, {}};
  p.matrix << q, off, off, 1.0 - q;
  return p;
}

/// P_2 = diag(1, 0).
inline Eigen::Matrix2cd p2() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = 1.0;
  return m;
}

/// Real rotation G with G P_2 G* = R_q and G (I - P_2) G* = R^-_{1-q}.
inline Eigen::Matrix2cd conjugating_rotation(double q) {
  require_open_unit(q, "conjugating_rotation");
  const double c = std::sqrt(q);
  const double s = std::sqrt(1.0 - q);
  Eigen::Matrix2cd g;
  g << c, -s, s, c;
  return g;
}

/// The 3x3 corner: U0 diag(1,0,0) U0* = K0 and U0 diag(0,1,0) U0* = L0.
inline CMatrix corner_unitary() {
  const double a = 1.0 / std::sqrt(2.0);
  const double b = 1.0 / std::sqrt(3.0);
  const double c = 1.0 / std::sqrt(6.0);
  CMatrix u(3, 3);
  u << a, b, c,
       a, -b, -c,
       0.0, b, -2.0 * c;
  return u;
}

inline CMatrix corner_k0() {
  CMatrix k = CMatrix::Zero(3, 3);
  k.topLeftCorner(2, 2).setConstant(0.5);
  return k;
}

inline CMatrix corner_l0() {
  CMatrix l(3, 3);
  l << 1.0, -1.0, 1.0,
      -1.0, 1.0, -1.0,
       1.0, -1.0, 1.0;
  return l / 3.0;
}

// ---------------------------------------------------------------------------
// Rotation parameters

struct ParameterAssignment {
  std::vector<double> qs, ts, ss;
};

/// Empty string when every constraint holds, otherwise the first violation.
inline std::string check_parameters(const ParameterAssignment& pa, bool oddCorner) {
  auto in_open = [](double x) { return x > 0.0 && x < 1.0; };
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  for (const auto* list : {&pa.qs, &pa.ts, &pa.ss})
    for (double x : *list)
      if (!in_open(x)) return "parameter outside (0,1)";
  std::vector<double> qt = pa.qs;
  qt.insert(qt.end(), pa.ts.begin(), pa.ts.end());
  if (!distinct(qt)) return "qs and ts are not pairwise distinct";
  std::vector<double> rs = pa.ss;
  for (double t : pa.ts) rs.push_back(1.0 - t);
  if (!distinct(rs)) return "reflected ts and ss are not pairwise distinct";
  if (oddCorner) {
    std::vector<double> all = qt;
    all.insert(all.end(), rs.begin(), rs.end());
    for (double x : all)
      if (std::abs(x - 0.5) < 1e-12 || std::abs(x - 1.0 / 3.0) < 1e-12)
        return "parameter equals 1/2 or 1/3 with the odd corner active";
  }
  return {};
}

/// Deterministic grid values i/D, skipping 1/2, 1/3, 2/3 and collisions,
/// assigned in the order qs, ts, ss. D starts at r1+r2+r3+2 and doubles
/// until the grid is large enough.
inline ParameterAssignment assign_parameters(int r1, int r2, int r3, bool oddCorner) {
  if (r1 < 0 || r2 < 0 || r3 < 0) throw Error(ErrorKind::InvalidParameter, "parameter counts must be >= 0");
  const long v = static_cast<long>(r1) + r2 + r3;
  for (long denom = v + 2;; denom *= 2) {
    auto forbidden = [denom](long c) { return 2 * c == denom || 3 * c == denom || 3 * c == 2 * denom; };
    std::vector<long> qt, refl, ss;
    std::vector<bool> used(static_cast<std::size_t>(denom), false);
    long c = 1;
    auto next = [&](auto&& ok) -> long {
      for (; c < denom; ++c)
        if (!used[static_cast<std::size_t>(c)] && !forbidden(c) && ok(c)) {
          used[static_cast<std::size_t>(c)] = true;
          return c++;
        }
      return -1;
    };
    bool exhausted = false;
    for (int i = 0; i < r1 && !exhausted; ++i) {
      const long x = next([](long) { return true; });
      if (x < 0) exhausted = true; else qt.push_back(x);
    }
    for (int i = 0; i < r2 && !exhausted; ++i) {
      const long x = next([](long) { return true; });
      if (x < 0) exhausted = true; else { qt.push_back(x); refl.push_back(denom - x); }
    }
    for (int i = 0; i < r3 && !exhausted; ++i) {
      const long x = next([&](long y) { return std::find(refl.begin(), refl.end(), y) == refl.end(); });
      if (x < 0) exhausted = true; else ss.push_back(x);
    }
    if (exhausted) continue;

    ParameterAssignment pa;
    const double d = static_cast<double>(denom);
    for (int i = 0; i < r1; ++i) pa.qs.push_back(static_cast<double>(qt[static_cast<std::size_t>(i)]) / d);
    for (int i = 0; i < r2; ++i) pa.ts.push_back(static_cast<double>(qt[static_cast<std::size_t>(r1 + i)]) / d);
    for (long x : ss) pa.ss.push_back(static_cast<double>(x) / d);
    if (auto why = check_parameters(pa, oddCorner); !why.empty())
      throw Error(ErrorKind::InvalidParameter, "assign_parameters produced an invalid assignment: " + why);
    return pa;
  }
}

// ---------------------------------------------------------------------------
// Block patterns and the hollow-block subspace

/// Diagonal block sizes: (n/2, n/2) or (p, q, r).
struct BlockPattern {
  std::vector<Index> sizes;

  Index n() const { return std::accumulate(sizes.begin(), sizes.end(), Index{0}); }
  bool is_half() const { return sizes.size() == 2; }
};

inline void validate_pattern(const BlockPattern& pattern) {
  const Index n = pattern.n();
  for (Index s : pattern.sizes)
    if (s <= 0) throw Error(ErrorKind::InvalidPattern, "pattern sizes must be positive");
  if (pattern.sizes.size() == 2) {
    if (pattern.sizes[0] != pattern.sizes[1]) throw Error(ErrorKind::InvalidPattern, "two-block pattern must be (n/2, n/2)");
  } else if (pattern.sizes.size() == 3) {
    for (Index s : pattern.sizes)
      if (2 * s >= n) throw Error(ErrorKind::InvalidPattern, "three-block pattern needs p, q, r < n/2");
  } else {
    throw Error(ErrorKind::InvalidPattern, "pattern must have two or three blocks");
  }
}

/// Every valid pattern for size n: (n/2, n/2) when n is even, and all ordered
/// (p, q, r) with p + q + r = n and p, q, r < n/2.
inline std::vector<BlockPattern> all_patterns(Index n) {
  std::vector<BlockPattern> out;
  if (n % 2 == 0) out.push_back({{n / 2, n / 2}});
  for (Index p = 1; 2 * p < n; ++p)
    for (Index q = 1; 2 * q < n; ++q) {
      const Index r = n - p - q;
      if (r >= 1 && 2 * r < n) out.push_back({{p, q, r}});
    }
  return out;
}

/// Block id of every index.
inline std::vector<Index> block_of(const BlockPattern& pattern) {
  std::vector<Index> id;
  for (std::size_t b = 0; b < pattern.sizes.size(); ++b)
    for (Index k = 0; k < pattern.sizes[b]; ++k) id.push_back(static_cast<Index>(b));
  return id;
}

/// (i, j) positions outside the diagonal blocks, column-major.
inline std::vector<std::pair<Index, Index>> hollow_block_positions(const BlockPattern& pattern) {
  const auto id = block_of(pattern);
  const Index n = pattern.n();
  std::vector<std::pair<Index, Index>> pos;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (id[static_cast<std::size_t>(i)] != id[static_cast<std::size_t>(j)]) pos.emplace_back(i, j);
  return pos;
}

/// Matrix units spanning V(pattern): zero on every diagonal block.
inline linalg::SubspaceBasis hollow_block_basis(const BlockPattern& pattern) {
  const Index n = pattern.n();
  linalg::SubspaceBasis v{n, {}};
  for (auto [i, j] : hollow_block_positions(pattern)) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, j) = 1.0;
    v.basis.push_back(std::move(e));
  }
  return v;
}

inline linalg::SubspaceBasis conjugate_basis(const linalg::SubspaceBasis& v, const CMatrix& u) {
  linalg::SubspaceBasis out{v.n, {}};
  for (const auto& b : v.basis) out.basis.push_back(u * b * u.adjoint());
  return out;
}

/// Coordinate projections whose joint commutant is blkdiag(*) on the pattern:
/// {diag(I, 0)} for (n/2, n/2); {diag(I_p,0,0), diag(0,I_q,0)} for (p, q, r).
inline std::vector<CMatrix> pattern_projectors(const BlockPattern& pattern) {
  const Index n = pattern.n();
  const auto off = waring::block_offsets(pattern.sizes);
  std::vector<CMatrix> out;
  for (std::size_t b = 0; b + 1 < pattern.sizes.size(); ++b) {
    CMatrix r = CMatrix::Zero(n, n);
    r.diagonal().segment(off[b], pattern.sizes[b]).setOnes();
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoupling unitary

struct DecouplingUnitary {
  CMatrix U;
  BlockPattern pattern;
  /// frame[pos] = original basis index placed at position pos of the permuted
  /// frame (the corner, if any, occupies positions 0..2, then 2x2 blocks).
  std::vector<Index> frame;
  ParameterAssignment params;
  bool oddCorner = false;
  Index r1 = 0, r2 = 0, r3 = 0;

  /// Permutation matrix S with S e_pos = e_{frame[pos]}.
  CMatrix permutation() const {
    const auto n = static_cast<Index>(frame.size());
    CMatrix s = CMatrix::Zero(n, n);
    for (Index pos = 0; pos < n; ++pos) s(frame[static_cast<std::size_t>(pos)], pos) = 1.0;
    return s;
  }
};

/// A unitary U such that only diagonal matrices commute with the pattern
/// projectors and their U-conjugates. Built in a permuted frame as a block
/// diagonal of 2x2 rotations (plus the 3x3 corner when n is odd), then
/// conjugated back by the frame permutation.
inline DecouplingUnitary build_decoupling_unitary(Index n, const BlockPattern& pattern) {
  validate_pattern(pattern);
  if (pattern.n() != n) throw Error(ErrorKind::InvalidPattern, "pattern sizes do not sum to n");

  DecouplingUnitary d;
  d.pattern = pattern;
  std::deque<Index> first, second, third;
  const auto id = block_of(pattern);
  for (Index i = 0; i < n; ++i) {
    const Index b = id[static_cast<std::size_t>(i)];
    (b == 0 ? first : b == 1 ? second : third).push_back(i);
  }
  auto take = [](std::deque<Index>& dq) {
    const Index v = dq.front();
    dq.pop_front();
    return v;
  };

  std::vector<Eigen::Matrix2cd> rotations;
  if (pattern.is_half()) {
    d.r1 = n / 2;
    d.params = assign_parameters(static_cast<int>(d.r1), 0, 0, false);
    for (Index j = 0; j < d.r1; ++j) {
      d.frame.push_back(take(first));
      d.frame.push_back(take(second));
      rotations.push_back(conjugating_rotation(d.params.qs[static_cast<std::size_t>(j)]));
    }
  } else {
    d.oddCorner = n % 2 == 1;
    if (d.oddCorner) {
      d.frame.push_back(take(first));
      d.frame.push_back(take(second));
      d.frame.push_back(take(third));
    }
    const auto p = static_cast<Index>(first.size());
    const auto q = static_cast<Index>(second.size());
    const auto r = static_cast<Index>(third.size());
    d.r1 = (p + r - q) / 2;  // R1 blocks paired with the third group
    d.r2 = (p + q - r) / 2;  // R1 / R2 complementary pairs
    d.r3 = (q + r - p) / 2;  // R2 blocks paired with the third group
    if (d.r1 < 0 || d.r2 < 0 || d.r3 < 0 || d.r1 + d.r2 != p || d.r2 + d.r3 != q || d.r1 + d.r3 != r)
      throw Error(ErrorKind::InvalidPattern, "pattern does not admit the paired layout");
    d.params = assign_parameters(static_cast<int>(d.r1), static_cast<int>(d.r2), static_cast<int>(d.r3), d.oddCorner);
    for (Index j = 0; j < d.r1; ++j) {
      d.frame.push_back(take(first));
      d.frame.push_back(take(third));
      rotations.push_back(conjugating_rotation(d.params.qs[static_cast<std::size_t>(j)]));
    }
    for (Index j = 0; j < d.r2; ++j) {
      d.frame.push_back(take(first));
      d.frame.push_back(take(second));
      rotations.push_back(conjugating_rotation(d.params.ts[static_cast<std::size_t>(j)]));
    }
    for (Index j = 0; j < d.r3; ++j) {
      d.frame.push_back(take(second));
      d.frame.push_back(take(third));
      rotations.push_back(conjugating_rotation(d.params.ss[static_cast<std::size_t>(j)]));
    }
  }

  CMatrix uframe = CMatrix::Zero(n, n);
  Index off = 0;
  if (d.oddCorner) {
    uframe.topLeftCorner(3, 3) = corner_unitary();
    off = 3;
  }
  for (const auto& g : rotations) {
    uframe.block(off, off, 2, 2) = g;
    off += 2;
  }
  const CMatrix s = d.permutation();
  d.U = s * uframe * s.transpose();
  const double unitarity = (d.U.adjoint() * d.U - CMatrix::Identity(n, n)).norm();
  if (unitarity > 1e-12) throw Error(ErrorKind::ResidualTooLarge, "decoupling unitary lost unitarity");
  return d;
}

// ---------------------------------------------------------------------------
// Hollow split

struct HollowSplit {
  CMatrix U;
  BlockPattern pattern;
  CMatrix C1;
  CMatrix C2;
  double residual = 0.0;  // ||M - C1 - U C2 U*||_F
};

/// Minimal-norm C1, C2 in V(pattern) with M = C1 + U C2 U*. The unknowns are
/// only the entries outside the diagonal blocks, so those blocks are exactly 0.
inline HollowSplit split_hollow(const CMatrix& m, const BlockPattern& pattern, const Tolerances& tol = {}) {
  const Index n = m.rows();
  if (m.cols() != n) throw Error(ErrorKind::DimensionMismatch, "split_hollow needs a square matrix");
  const double mnorm = m.norm();
  if (n > 0 && m.diagonal().cwiseAbs().maxCoeff() > tol.hollowTol * std::max(1.0, mnorm))
    throw Error(ErrorKind::InvalidParameter, "split_hollow needs a matrix with zero diagonal");
  const auto d = build_decoupling_unitary(n, pattern);
  const auto pos = hollow_block_positions(pattern);
  const auto dim = static_cast<Index>(pos.size());

  CMatrix system(n * n, 2 * dim);
  system.setZero();
  for (Index k = 0; k < dim; ++k) {
    const auto [i, j] = pos[static_cast<std::size_t>(k)];
    system(j * n + i, k) = 1.0;
    // vec(U E_ij U*) = vec(u_i u_j^*)
    const CMatrix conj_unit = d.U.col(i) * d.U.col(j).adjoint();
    system.col(dim + k) = linalg::vec(conj_unit);
  }
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(system);
  cod.setThreshold(tol.rankTol);
  const CVector x = cod.solve(linalg::vec(m));

  HollowSplit out{d.U, pattern, CMatrix::Zero(n, n), CMatrix::Zero(n, n), 0.0};
  for (Index k = 0; k < dim; ++k) {
    const auto [i, j] = pos[static_cast<std::size_t>(k)];
    out.C1(i, j) = x(k);
    out.C2(i, j) = x(dim + k);
  }
  out.residual = (m - out.C1 - d.U * out.C2 * d.U.adjoint()).norm();
  if (out.residual > tol.splitTol * std::max(1.0, mnorm))
    throw Error(ErrorKind::ResidualTooLarge, "split_hollow residual " + std::to_string(out.residual));
  return out;
}

}  // namespace matwaring::unitaries
