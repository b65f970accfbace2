#include <gtest/gtest.h>

#include <set>

#include "matwaring/unitaries.hpp"
#include "test_support.hpp"

using namespace matwaring;
using namespace matwaring::unitaries;

namespace {

std::vector<double> q_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 100; ++i) g.push_back(i / 101.0);
  return g;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Format;
}

std::vector<CMatrix> commutant_generators(const DecouplingUnitary& d) {
  std::vector<CMatrix> mats = pattern_projectors(d.pattern);
  const auto k = mats.size();
  for (std::size_t i = 0; i < k; ++i) mats.push_back(d.U * mats[i] * d.U.adjoint());
  return mats;
}

/// Null space of the stacked commutator operators, independently of
/// joint_commutant_dimension: every null vector, reshaped, must be diagonal.
double worst_offdiagonal_commutant_mass(const std::vector<CMatrix>& mats) {
  const Index n = mats.front().rows();
  CMatrix stacked(static_cast<Index>(mats.size()) * n * n, n * n);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    // vec(AM - MA) = (M^T kron I - I kron M) vec(A), written out entrywise.
    CMatrix op = CMatrix::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index l = 0; l < n; ++l) {
          op(j * n + i, l * n + i) += mats[k](l, j);  // (A M)_ij = sum_l A_il M_lj
          op(j * n + i, j * n + l) -= mats[k](i, l);  // (M A)_ij = sum_l M_il A_lj
        }
    stacked.middleRows(static_cast<Index>(k) * n * n, n * n) = op;
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double worst = 0.0;
  for (Index c = 0; c < n * n; ++c) {
    const double s = c < sv.size() ? sv(c) : 0.0;
    if (s > 1e-10 * sv(0)) continue;
    const CVector v = svd.matrixV().col(c);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) worst = std::max(worst, std::abs(v(j * n + i)));
  }
  return worst;
}

}  // namespace

TEST(Projector, HalfGoldenValues) {
  Eigen::Matrix2cd plus, minus;
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LE((make_projector(0.5, Sign::Plus).matrix - plus).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((make_projector(0.5, Sign::Minus).matrix - minus).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectorProperty, RankOneOrthogonalIdempotent) {
  for (double q : q_grid())
    for (Sign s : {Sign::Plus, Sign::Minus}) {
      const Eigen::Matrix2cd m = make_projector(q, s).matrix;
      EXPECT_LE((m * m - m).norm(), 1e-14);
      EXPECT_LE((m - m.adjoint()).norm(), 0.0);
      EXPECT_NEAR(m.trace().real(), 1.0, 1e-15);
      EXPECT_NEAR(std::abs(m.determinant()), 0.0, 1e-15);
    }
  EXPECT_EQ(kind_of([] { make_projector(0.0, Sign::Plus); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { make_projector(1.0, Sign::Minus); }), ErrorKind::InvalidParameter);
}

TEST(Rotation, FortyFiveDegreesAtHalf) {
  const Eigen::Matrix2cd g = conjugating_rotation(0.5);
  const double h = std::sqrt(0.5);
  EXPECT_NEAR(std::abs(g(0, 0) - h), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g(0, 1) + h), 0.0, 1e-15);
  EXPECT_LE((g * p2() * g.adjoint() - make_projector(0.5, Sign::Plus).matrix).norm(), 1e-15);
}

TEST(RotationProperty, ConjugatesP2AndComplement) {
  for (double q : q_grid()) {
    const Eigen::Matrix2cd g = conjugating_rotation(q);
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    EXPECT_LE((g * p2() * g.adjoint() - make_projector(q, Sign::Plus).matrix).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((g * (id - p2()) * g.adjoint() - make_projector(1.0 - q, Sign::Minus).matrix).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((g.adjoint() * g - id).norm(), 1e-15);
  }
  EXPECT_THROW(conjugating_rotation(1.5), Error);
}

TEST(Corner, DisplayedProjections) {
  const CMatrix u = corner_unitary();
  CMatrix t0 = CMatrix::Zero(3, 3), s0 = CMatrix::Zero(3, 3);
  t0(0, 0) = 1.0;
  s0(1, 1) = 1.0;
  CMatrix k0(3, 3), l0(3, 3);
  k0 << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 0;
  l0 << 1, -1, 1, -1, 1, -1, 1, -1, 1;
  l0 /= 3.0;
  EXPECT_LE((corner_k0() - k0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((corner_l0() - l0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((u * t0 * u.adjoint() - k0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((u * s0 * u.adjoint() - l0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Corner, ColumnsOrthonormal) {
  const CMatrix u = corner_unitary();
  EXPECT_NEAR(std::abs(u.col(0).dot(u.col(1))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u.col(0).dot(u.col(2))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u.col(1).dot(u.col(2))), 0.0, 1e-15);
  EXPECT_LE((u.adjoint() * u - CMatrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_NEAR(u(2, 0).real(), 0.0, 0.0);
}

TEST(Parameters, TwoQs) {
  const auto p = assign_parameters(2, 0, 0, false);
  ASSERT_EQ(p.qs.size(), 2u);
  EXPECT_NE(p.qs[0], p.qs[1]);
  for (double q : p.qs) EXPECT_TRUE(q > 0 && q < 1);
}

TEST(Parameters, OddCornerAvoidsHalfAndThird) {
  const auto p = assign_parameters(0, 1, 0, true);
  ASSERT_EQ(p.ts.size(), 1u);
  for (double x : {p.ts[0], 1.0 - p.ts[0]}) {
    EXPECT_GT(std::abs(x - 0.5), 1e-12);
    EXPECT_GT(std::abs(x - 1.0 / 3.0), 1e-12);
  }
}

TEST(Parameters, TwoOfEachAllDistinct) {
  const auto p = assign_parameters(2, 2, 2, true);
  EXPECT_EQ(check_parameters(p, true), "");
  std::set<double> qt(p.qs.begin(), p.qs.end());
  qt.insert(p.ts.begin(), p.ts.end());
  EXPECT_EQ(qt.size(), 4u);
  std::set<double> rs(p.ss.begin(), p.ss.end());
  for (double t : p.ts) rs.insert(1.0 - t);
  EXPECT_EQ(rs.size(), 4u);
}

TEST(ParametersProperty, EveryCountCombinationSatisfiesInvariants) {
  for (int r1 = 0; r1 <= 5; ++r1)
    for (int r2 = 0; r2 <= 5; ++r2)
      for (int r3 = 0; r3 <= 5; ++r3)
        for (bool odd : {false, true}) {
          const auto p = assign_parameters(r1, r2, r3, odd);
          EXPECT_EQ(p.qs.size(), static_cast<std::size_t>(r1));
          EXPECT_EQ(p.ts.size(), static_cast<std::size_t>(r2));
          EXPECT_EQ(p.ss.size(), static_cast<std::size_t>(r3));
          EXPECT_EQ(check_parameters(p, odd), "") << r1 << r2 << r3 << odd;
          const auto again = assign_parameters(r1, r2, r3, odd);
          EXPECT_EQ(again.qs, p.qs);
          EXPECT_EQ(again.ss, p.ss);
        }
  EXPECT_THROW(assign_parameters(-1, 0, 0, false), Error);
}

TEST(Parameters, CheckerCatchesViolations) {
  EXPECT_NE(check_parameters({{0.25, 0.25}, {}, {}}, false), "");
  EXPECT_NE(check_parameters({{0.25}, {0.25}, {}}, false), "");
  EXPECT_NE(check_parameters({{}, {0.25}, {0.75}}, false), "");
  EXPECT_NE(check_parameters({{0.5}, {}, {}}, true), "");
  EXPECT_NE(check_parameters({{}, {2.0 / 3.0}, {}}, true), "");  // 1 - t = 1/3
  EXPECT_EQ(check_parameters({{0.5}, {}, {}}, false), "");
  EXPECT_NE(check_parameters({{1.0}, {}, {}}, false), "");
}

TEST(Patterns, ValidationAndEnumeration) {
  EXPECT_EQ(kind_of([] { validate_pattern({{2, 3}}); }), ErrorKind::InvalidPattern);
  EXPECT_EQ(kind_of([] { validate_pattern({{3, 1, 1}}); }), ErrorKind::InvalidPattern);
  EXPECT_EQ(kind_of([] { validate_pattern({{2, 0, 2}}); }), ErrorKind::InvalidPattern);
  EXPECT_EQ(kind_of([] { validate_pattern({{1, 1, 1, 1}}); }), ErrorKind::InvalidPattern);
  EXPECT_EQ(kind_of([] { build_decoupling_unitary(5, {{2, 2}}); }), ErrorKind::InvalidPattern);
  EXPECT_EQ(all_patterns(2).size(), 1u);
  EXPECT_EQ(all_patterns(3).size(), 1u);
  EXPECT_EQ(all_patterns(4).size(), 1u);   // (1,1,2)-type triples need every part < 2
  EXPECT_EQ(all_patterns(5).size(), 3u);
  EXPECT_EQ(all_patterns(6).size(), 2u);
  for (Index n = 2; n <= 8; ++n)
    for (const auto& p : all_patterns(n)) EXPECT_NO_THROW(validate_pattern(p));
}

TEST(Decoupling, SingleRotationAtTwo) {
  const auto d = build_decoupling_unitary(2, {{1, 1}});
  const double q = assign_parameters(1, 0, 0, false).qs[0];
  EXPECT_LE((d.U - CMatrix(conjugating_rotation(q))).norm(), 1e-15);
}

TEST(Decoupling, HalfPatternAtFour) {
  const auto d = build_decoupling_unitary(4, {{2, 2}});
  EXPECT_LE(linalg::joint_commutant_dimension(commutant_generators(d)), 4);
}

TEST(Decoupling, ThreeBlockPatternAtFive) {
  const auto d = build_decoupling_unitary(5, {{2, 2, 1}});
  EXPECT_TRUE(d.oddCorner);
  EXPECT_LE(linalg::joint_commutant_dimension(commutant_generators(d)), 5);
}

TEST(DecouplingProperty, SweepUnitaryCommutantFrameAndCoverage) {
  for (Index n = 2; n <= 8; ++n)
    for (const auto& pattern : all_patterns(n)) {
      const auto d = build_decoupling_unitary(n, pattern);
      SCOPED_TRACE("n=" + std::to_string(n) + " blocks=" + std::to_string(pattern.sizes.size()));
      EXPECT_LE((d.U.adjoint() * d.U - CMatrix::Identity(n, n)).norm(), 1e-12);
      const auto gens = commutant_generators(d);
      EXPECT_LE(linalg::joint_commutant_dimension(gens), n);
      EXPECT_LE(worst_offdiagonal_commutant_mass(gens), 1e-8);

      // Permuted frame: U is block diagonal with 2x2 blocks after the corner.
      std::set<Index> seen(d.frame.begin(), d.frame.end());
      EXPECT_EQ(static_cast<Index>(seen.size()), n);
      const CMatrix s = d.permutation();
      const CMatrix inframe = s.transpose() * d.U * s;
      const Index lead = d.oddCorner ? 3 : 0;
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          const bool corner = i < lead && j < lead;
          const bool pair = i >= lead && j >= lead && (i - lead) / 2 == (j - lead) / 2;
          if (!corner && !pair) {
            EXPECT_EQ(std::abs(inframe(i, j)), 0.0);
          }
        }
      if (pattern.is_half()) {
        // S* R S = blkdiag(P2, ..., P2).
        const CMatrix r = s.transpose() * pattern_projectors(pattern)[0] * s;
        for (Index i = 0; i < n; ++i) EXPECT_EQ(r(i, i).real(), i % 2 == 0 ? 1.0 : 0.0);
      }

      const auto v = hollow_block_basis(pattern);
      EXPECT_GE(linalg::subspace_sum_rank(v, conjugate_basis(v, d.U)), n * n - n);
    }
}

TEST(SplitHollow, ZeroMatrix) {
  const auto s = split_hollow(CMatrix::Zero(4, 4), {{2, 2}});
  EXPECT_EQ(s.C1.norm(), 0.0);
  EXPECT_EQ(s.C2.norm(), 0.0);
}

TEST(SplitHollow, MemberOfSubspace) {
  auto rng = tsupport::rng_for(41);
  const BlockPattern pattern{{2, 2, 1}};
  CMatrix m = tsupport::random_matrix(5, rng);
  const auto id = block_of(pattern);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j)
      if (id[static_cast<std::size_t>(i)] == id[static_cast<std::size_t>(j)]) m(i, j) = 0.0;
  const auto s = split_hollow(m, pattern);
  EXPECT_LE(s.residual, 1e-9 * m.norm());
}

TEST(SplitHollow, InsideDiagonalBlockNeedsBothTerms) {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 1) = m(1, 0) = 1.0;
  const auto s = split_hollow(m, {{2, 2}});
  EXPECT_LE(s.residual, 1e-9);
  EXPECT_GT(s.C2.norm(), 0.1);
  EXPECT_LE((m - s.C1 - s.U * s.C2 * s.U.adjoint()).norm(), 1e-9);
}

TEST(SplitHollow, RejectsBadInput) {
  EXPECT_EQ(kind_of([] { split_hollow(CMatrix::Identity(4, 4), {{2, 2}}); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { split_hollow(CMatrix::Zero(4, 4), {{3, 1}}); }), ErrorKind::InvalidPattern);
}

TEST(SplitHollowProperty, RandomHollowMatricesEveryPattern) {
  auto rng = tsupport::rng_for(42);
  for (Index n = 2; n <= 8; ++n)
    for (const auto& pattern : all_patterns(n)) {
      const auto id = block_of(pattern);
      for (int t = 0; t < 10; ++t) {
        CMatrix m = tsupport::random_matrix(n, rng);
        m.diagonal().setZero();
        const auto s = split_hollow(m, pattern);
        EXPECT_LE(s.residual, 1e-9 * std::max(1.0, m.norm()));
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j)
            if (id[static_cast<std::size_t>(i)] == id[static_cast<std::size_t>(j)]) {
              EXPECT_EQ(s.C1(i, j), Complex(0, 0));
              EXPECT_EQ(s.C2(i, j), Complex(0, 0));
            }
      }
    }
}
