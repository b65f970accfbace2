#include <gtest/gtest.h>

#include "matwaring/decompose.hpp"
#include "test_support.hpp"

using namespace matwaring;
using namespace matwaring::waring;

namespace {

CMatrix scalar(Complex z) { return CMatrix::Constant(1, 1, z); }

CMatrix diag_of(const std::vector<Complex>& xs) {
  const auto n = static_cast<Index>(xs.size());
  CMatrix d = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) d(i, i) = xs[static_cast<std::size_t>(i)];
  return d;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Format;
}

std::vector<Complex> spectrum(const CMatrix& m) { return linalg::eigenvalues(m); }

void expect_sign_discipline(const WaringCertificate& c) {
  if (c.mode == Mode::FourTerm) {
    ASSERT_EQ(c.coefficients.size(), 4u);
    EXPECT_EQ(c.coefficients, (std::vector<Complex>{1.0, -1.0, 1.0, -1.0}));
  } else if (c.mode == Mode::TwoTerm) {
    EXPECT_EQ(c.coefficients, (std::vector<Complex>{1.0, -1.0}));
  }
}

/// Recomputes the residual from the tuples alone.
double recomputed_residual(const freealg::NcPolynomial& f, const WaringCertificate& c) {
  CMatrix s = CMatrix::Zero(c.n, c.n);
  for (std::size_t i = 0; i < c.tuples.size(); ++i) s += c.coefficients[i] * freealg::evaluate(f, c.tuples[i], c.n);
  return (c.target - s).norm();
}

void expect_steps_valid(const WaringCertificate& c) {
  for (const auto& s : c.steps) EXPECT_TRUE(s.cert.valid(c.tolerances.certTol)) << s.name;
}

}  // namespace

// ---------------------------------------------------------------------------
// Block-triangular similarity

TEST(BlockTriangular, ZeroCouplingGivesIdentity) {
  const std::vector<CMatrix> blocks{scalar(1.0), scalar(2.0), scalar(3.0)};
  const auto c = block_triangular_similarity(blocks, CMatrix::Zero(3, 3), Orientation::Upper);
  EXPECT_EQ(c.T, CMatrix::Identity(3, 3));
}

TEST(BlockTriangular, ScalarSylvesterByHand) {
  const std::vector<CMatrix> blocks{scalar(1.0), scalar(2.0)};
  CMatrix off = CMatrix::Zero(2, 2);
  off(0, 1) = 3.0;
  const auto c = block_triangular_similarity(blocks, off, Orientation::Upper);
  CMatrix t(2, 2), target(2, 2);
  t << 1, 3, 0, 1;  // X solves 1*X - X*2 = -3
  target << 1, 3, 0, 2;
  EXPECT_LE((c.T - t).norm(), 1e-15);
  EXPECT_LE((c.T * diag_of({1.0, 2.0}) * c.Tinv - target).norm(), 1e-14);
}

TEST(BlockTriangularProperty, PlantedDisjointSpectraBothOrientations) {
  auto rng = tsupport::rng_for(51);
  for (int t = 0; t < 20; ++t) {
    const std::vector<CMatrix> blocks{tsupport::planted(tsupport::reals({1, 2}), rng),
                                      tsupport::planted(tsupport::reals({-1, 5, 7}), rng),
                                      tsupport::planted(tsupport::reals({3}), rng)};
    const Index n = 6;
    const auto off = block_offsets(block_sizes(blocks));
    for (auto orient : {Orientation::Upper, Orientation::Lower}) {
      CMatrix o = tsupport::random_matrix(n, rng);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          const bool keep = orient == Orientation::Upper ? j > i : j < i;
          if (!keep) o.block(off[i], off[j], off[i + 1] - off[i], off[j + 1] - off[j]).setZero();
        }
      const auto c = block_triangular_similarity(blocks, o, orient);
      const CMatrix d = linalg::block_diag(blocks);
      EXPECT_LE((c.T * d * c.Tinv - (d + o)).norm(), 1e-9 * c.conditionEstimate * d.norm());
      EXPECT_TRUE(c.valid(1e-9));
      // T - I is strictly block triangular in the same orientation.
      const CMatrix nmat = c.T - CMatrix::Identity(n, n);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          const bool allowed = orient == Orientation::Upper ? j > i : j < i;
          if (!allowed) {
            EXPECT_EQ(nmat.block(off[i], off[j], off[i + 1] - off[i], off[j + 1] - off[j]).norm(), 0.0);
          }
        }
    }
  }
}

TEST(BlockTriangular, Rejections) {
  const std::vector<CMatrix> same{scalar(1.0), scalar(1.0)};
  CMatrix off = CMatrix::Zero(2, 2);
  off(0, 1) = 1.0;
  EXPECT_EQ(kind_of([&] { block_triangular_similarity(same, off, Orientation::Upper); }), ErrorKind::SpectraOverlap);
  const std::vector<CMatrix> distinct{scalar(1.0), scalar(2.0)};
  EXPECT_EQ(kind_of([&] { block_triangular_similarity(distinct, off, Orientation::Lower); }), ErrorKind::InvalidPattern);
  EXPECT_EQ(kind_of([&] { block_triangular_similarity(distinct, CMatrix::Zero(3, 3), Orientation::Upper); }),
            ErrorKind::DimensionMismatch);
}

// ---------------------------------------------------------------------------
// Difference of similar matrices

namespace {

canon::SpectralPartition manual_partition(std::vector<CMatrix> blocks) {
  canon::SpectralPartition p;
  p.caseTag = blocks.size() == 2 ? canon::PartitionCase::A : canon::PartitionCase::B;
  for (const auto& b : blocks) {
    p.blockSizes.push_back(b.rows());
    p.blockSpectra.push_back(spectrum(b));
  }
  p.blocks = std::move(blocks);
  p.toBlockDiag = linalg::identity_certificate(linalg::block_diag(p.blocks));
  return p;
}

}  // namespace

TEST(DiffOfSimilar, ZeroC) {
  const auto p = manual_partition({scalar(1.0), scalar(-1.0)});
  const auto d = diff_of_similar(p, CMatrix::Zero(2, 2));
  EXPECT_EQ(d.Bp, diag_of({1.0, -1.0}));
  EXPECT_EQ(d.Bpp, diag_of({1.0, -1.0}));
}

TEST(DiffOfSimilar, TwoByTwoPattern) {
  const auto p = manual_partition({scalar(1.0), scalar(-1.0)});
  const Complex c(2.0, 0.5), dd(-3.0, 1.0);
  CMatrix m(2, 2), bp(2, 2), bpp(2, 2);
  m << 0, c, dd, 0;
  bp << 1, c, 0, -1;
  bpp << 1, 0, -dd, -1;
  const auto d = diff_of_similar(p, m);
  EXPECT_EQ(d.Bp, bp);
  EXPECT_EQ(d.Bpp, bpp);
  EXPECT_EQ(d.Bp - d.Bpp, m);
  EXPECT_LT(tsupport::spectrum_gap(spectrum(d.Bp), tsupport::reals({1, -1})), 1e-14);
  EXPECT_LT(tsupport::spectrum_gap(spectrum(d.Bpp), tsupport::reals({1, -1})), 1e-14);
}

TEST(DiffOfSimilar, CaseBExactAssembly) {
  auto rng = tsupport::rng_for(52);
  for (int t = 0; t < 10; ++t) {
    const CMatrix b = tsupport::planted(tsupport::reals({1, 1, 2, 2, 3}), rng);
    const auto p = canon::partition_spectrum(b);
    ASSERT_EQ(p.caseTag, canon::PartitionCase::B);
    CMatrix c = tsupport::random_matrix(5, rng);
    const auto off = block_offsets(p.blockSizes);
    for (std::size_t k = 0; k < 3; ++k) c.block(off[k], off[k], p.blockSizes[k], p.blockSizes[k]).setZero();
    const auto d = diff_of_similar(p, c);
    EXPECT_EQ((d.Bp - d.Bpp - c).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(d.toBp.valid(1e-9));
    EXPECT_TRUE(d.toBpp.valid(1e-9));
  }
}

TEST(DiffOfSimilar, NonzeroDiagonalBlockRejected) {
  const auto p = manual_partition({scalar(1.0), scalar(-1.0)});
  EXPECT_EQ(kind_of([&] { diff_of_similar(p, CMatrix::Identity(2, 2)); }), ErrorKind::InvalidPattern);
}

// ---------------------------------------------------------------------------
// Four-term decomposition

TEST(FourTerm, ZeroTargetRepeatsWitness) {
  auto rng = tsupport::rng_for(53);
  const CMatrix b = tsupport::random_matrix(4, rng);
  const auto ft = four_term_decompose(b, CMatrix::Zero(4, 4));
  for (const auto& t : ft.terms) EXPECT_EQ(t, b);
  EXPECT_EQ(ft.residual, 0.0);
}

TEST(FourTerm, TwoByTwoHollowTarget) {
  const CMatrix b = diag_of({1.0, -1.0});
  CMatrix a(2, 2);
  a << 0, 1, 1, 0;
  const auto ft = four_term_decompose(b, a);
  EXPECT_LE(ft.residual, 1e-10);
  for (const auto& t : ft.terms) EXPECT_LT(tsupport::spectrum_gap(spectrum(t), tsupport::reals({1, -1})), 1e-6);
  for (const auto& s : ft.steps) EXPECT_TRUE(s.cert.valid(1e-9)) << s.name;
}

TEST(FourTerm, CaseBFuzz) {
  auto rng = tsupport::rng_for(54);
  const CMatrix b = tsupport::planted(tsupport::reals({1, 1, 2, 2, 3}), rng);
  for (int t = 0; t < 10; ++t) {
    const CMatrix a = tsupport::random_traceless(5, rng);
    const auto ft = four_term_decompose(b, a);
    EXPECT_LE(ft.residual, 1e-8 * std::max(1.0, a.norm()));
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_LT(tsupport::spectrum_gap(spectrum(ft.terms[i]), tsupport::reals({1, 1, 2, 2, 3})), 1e-6);
      EXPECT_EQ(ft.fromWitness[i].from, b);
      EXPECT_TRUE(ft.fromWitness[i].valid(1e-9));
    }
  }
}

TEST(FourTerm, NegativeControlHighMultiplicity) {
  auto rng = tsupport::rng_for(55);
  for (Index n = 3; n <= 8; ++n) {
    std::vector<Complex> s(static_cast<std::size_t>(n), Complex(0.5, 0.0));
    s.back() = Complex(2.0, 0.0);
    const CMatrix b = tsupport::planted(s, rng);
    const CMatrix a = tsupport::random_traceless(n, rng);
    EXPECT_EQ(kind_of([&] { four_term_decompose(b, a); }), ErrorKind::MultiplicityTooLarge) << n;
  }
}

TEST(FourTerm, NonTracelessTargetRejected) {
  EXPECT_EQ(kind_of([] { four_term_decompose(diag_of({1.0, -1.0}), CMatrix::Identity(2, 2)); }), ErrorKind::NonzeroTrace);
}

TEST(FourTerm, MatrixCertificateCarriesSigns) {
  auto rng = tsupport::rng_for(56);
  const CMatrix b = tsupport::planted(tsupport::reals({1, 2, 3, 4}), rng);
  const auto c = four_term_certificate(b, tsupport::random_traceless(4, rng));
  expect_sign_discipline(c);
  expect_steps_valid(c);
  EXPECT_EQ(c.terms.size(), 4u);
  EXPECT_TRUE(c.tuples.empty());
}

// ---------------------------------------------------------------------------
// Witness search

TEST(ImageSearch, IdentityPolynomialTakesFirstSample) {
  const auto w = image_search(freealg::parse("X1"), 4, Goal::MultiplicityHalf, 10, 7);
  EXPECT_EQ(w.sampleIndex, 0u);
  EXPECT_EQ(w.B, w.args[0]);
}

TEST(ImageSearch, CommutatorDistinctEigsAndTraceless) {
  const auto f = freealg::parse("[X1,X2]");
  const auto w = image_search(f, 2, Goal::DistinctEigs, 10, 3);
  EXPECT_LT(w.sampleIndex, 5u);
  for (std::uint64_t i = 0; i <= w.sampleIndex + 20; ++i) {
    auto rng = sample_rng(3, kSearchStream, i);
    const CMatrix img = freealg::evaluate(f, freealg::random_tuple(2, 2, rng));
    EXPECT_LE(std::abs(img.trace()), 1e-12 * std::max(1.0, img.norm()));
  }
}

TEST(ImageSearch, CommutatorHasNoNonzeroTrace) {
  try {
    image_search(freealg::parse("[X1,X2]"), 3, Goal::NonzeroTrace, 50, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExhausted);
    EXPECT_NE(std::string(e.what()).find("Generic"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { image_search(freealg::parse("X1"), 3, Goal::NonzeroTrace, 0, 0); }), ErrorKind::InvalidParameter);
}

TEST(ImageSearch, CentralPolynomialCannotReachGoal) {
  try {
    image_search(freealg::parse("[X1,X2]^2"), 2, Goal::MultiplicityHalf, 20, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExhausted);
    EXPECT_NE(std::string(e.what()).find("Central"), std::string::npos);
  }
}

TEST(ImageSearch, LowestIndexFromPerSampleGenerators) {
  const auto f = freealg::parse("X1^2 + X2");
  const auto w = image_search(f, 3, Goal::NonzeroTrace, 100, 42);
  const auto again = image_search(f, 3, Goal::NonzeroTrace, 100, 42);
  EXPECT_EQ(w.sampleIndex, again.sampleIndex);
  EXPECT_EQ(w.B, again.B);
  auto rng = sample_rng(42, kSearchStream, w.sampleIndex);
  const auto args = freealg::random_tuple(2, 3, rng);
  EXPECT_EQ(args, w.args);
  for (std::uint64_t i = 0; i < w.sampleIndex; ++i) {
    auto r = sample_rng(42, kSearchStream, i);
    EXPECT_FALSE(satisfies(freealg::evaluate(f, freealg::random_tuple(2, 3, r)), Goal::NonzeroTrace, {}));
  }
}

// ---------------------------------------------------------------------------
// Polynomial pipelines

TEST(WaringExpress, LinearPolynomialExpressesAnyTracelessMatrix) {
  auto rng = tsupport::rng_for(57);
  const auto f = freealg::parse("X1");
  for (Index n = 2; n <= 5; ++n) {
    const CMatrix a = tsupport::random_traceless(n, rng);
    const auto c = waring_express(f, a, {.budget = 100, .seed = static_cast<std::uint64_t>(n), .tol = {}});
    expect_sign_discipline(c);
    expect_steps_valid(c);
    EXPECT_LE(recomputed_residual(f, c), 1e-6 * std::max(1.0, a.norm()));
  }
}

TEST(WaringExpress, CommutatorAtThree) {
  auto rng = tsupport::rng_for(58);
  const auto f = freealg::parse("[X1,X2]");
  for (int t = 0; t < 5; ++t) {
    const CMatrix a = tsupport::random_traceless(3, rng);
    const auto c = waring_express(f, a, {.seed = static_cast<std::uint64_t>(t), .tol = {}});
    ASSERT_EQ(c.tuples.size(), 4u);
    EXPECT_LE(recomputed_residual(f, c), 1e-7 * std::max(1.0, a.norm()));
    EXPECT_EQ(freealg::evaluate(f, c.witnessArgs), c.witnessB);
    for (const auto& s : c.steps)
      if (s.term >= 0) {
        // Tuples are the witness arguments conjugated by the term's chain.
        const auto& tuple = c.tuples[static_cast<std::size_t>(s.term)];
        for (std::size_t k = 0; k < tuple.size(); ++k)
          EXPECT_LE((s.cert.T * c.witnessArgs[k] * s.cert.Tinv - tuple[k]).norm(), 1e-12 * s.cert.conditionEstimate * c.witnessArgs[k].norm());
        EXPECT_LT(tsupport::spectrum_gap(spectrum(c.terms[static_cast<std::size_t>(s.term)]), spectrum(c.witnessB)), 1e-6);
      }
  }
}

TEST(WaringExpress, CentralPolynomialRefused) {
  auto rng = tsupport::rng_for(59);
  EXPECT_EQ(kind_of([&] { waring_express(freealg::parse("[X1,X2]^2"), tsupport::random_traceless(2, rng)); }),
            ErrorKind::NotGeneric);
  EXPECT_EQ(kind_of([&] { waring_express(freealg::parse("X1*X2 - X2*X1"), tsupport::random_traceless(1, rng)); }),
            ErrorKind::NotGeneric);
  EXPECT_EQ(kind_of([&] { waring_express(freealg::parse("X1"), CMatrix::Identity(3, 3)); }), ErrorKind::NonzeroTrace);
}

TEST(WaringExpress, DeterministicForSeed) {
  auto rng = tsupport::rng_for(60);
  const CMatrix a = tsupport::random_traceless(4, rng);
  const auto f = freealg::parse("X1^2 + X2");
  const auto c1 = waring_express(f, a, {.seed = 5, .tol = {}});
  const auto c2 = waring_express(f, a, {.seed = 5, .tol = {}});
  ASSERT_EQ(c1.tuples.size(), c2.tuples.size());
  for (std::size_t i = 0; i < c1.tuples.size(); ++i) EXPECT_EQ(c1.tuples[i], c2.tuples[i]);
}

TEST(TwoTerm, ZeroTarget) {
  const auto f = freealg::parse("[X1,X2]");
  const auto c = two_term_decompose(f, CMatrix::Zero(3, 3));
  ASSERT_EQ(c.terms.size(), 2u);
  EXPECT_EQ(c.tuples[0], c.tuples[1]);
  EXPECT_EQ(c.residual, 0.0);
}

TEST(TwoTerm, MultilinearAtFour) {
  auto rng = tsupport::rng_for(61);
  const auto f = freealg::parse("X1*X2*X3 - X3*X2*X1");
  for (int t = 0; t < 3; ++t) {
    const CMatrix a = tsupport::random_traceless(4, rng);
    const auto c = two_term_decompose(f, a, {.seed = static_cast<std::uint64_t>(t), .tol = {}});
    expect_sign_discipline(c);
    expect_steps_valid(c);
    EXPECT_LE(recomputed_residual(f, c), 1e-7 * std::max(1.0, a.norm()));
  }
}

TEST(TwoTerm, CommutatorAtPrimeThree) {
  auto rng = tsupport::rng_for(62);
  const auto f = freealg::parse("[X1,X2]");
  const CMatrix a = tsupport::random_traceless(3, rng);
  const auto c = two_term_decompose(f, a);
  EXPECT_EQ(c.mode, Mode::TwoTerm);
  expect_sign_discipline(c);
  EXPECT_LE(recomputed_residual(f, c), 1e-6 * std::max(1.0, a.norm()));
  for (const auto& t : c.terms) EXPECT_LT(tsupport::spectrum_gap(spectrum(t), spectrum(c.witnessB)), 1e-6);
}

TEST(TwoTerm, CompositeSizeNeedsMultilinear) {
  auto rng = tsupport::rng_for(63);
  EXPECT_EQ(kind_of([&] { two_term_decompose(freealg::parse("X1^2 + X2"), tsupport::random_traceless(4, rng)); }),
            ErrorKind::PreconditionUnmet);
  // Prime size lifts the restriction.
  EXPECT_NO_THROW(two_term_decompose(freealg::parse("X1^2 + X2"), tsupport::random_traceless(5, rng)));
}

TEST(FiveTerm, TracelessTargetHasZeroLeadingCoefficient) {
  auto rng = tsupport::rng_for(64);
  const CMatrix t = tsupport::random_traceless(3, rng);
  const auto c = five_term_express(freealg::parse("X1^2 + X1"), t);
  ASSERT_EQ(c.coefficients.size(), 5u);
  EXPECT_LE(std::abs(c.coefficients[0]), 1e-12);
  EXPECT_LE(c.residual, 1e-6 * std::max(1.0, t.norm()));
}

TEST(FiveTerm, IdentityThroughLinearPolynomial) {
  const auto f = freealg::parse("X1");
  const auto c = five_term_express(f, CMatrix::Identity(2, 2));
  EXPECT_NEAR(std::abs(c.coefficients[0] - 2.0 / c.traceWitness.trace()), 0.0, 1e-14);
  EXPECT_LE(recomputed_residual(f, c), 1e-8);
  EXPECT_EQ(std::vector<Complex>(c.coefficients.begin() + 1, c.coefficients.end()), (std::vector<Complex>{1.0, -1.0, 1.0, -1.0}));
}

TEST(FiveTerm, CommutatorHitsTraceObstruction) {
  EXPECT_EQ(kind_of([] { five_term_express(freealg::parse("[X1,X2]"), CMatrix::Identity(3, 3), {.budget = 100, .tol = {}}); }),
            ErrorKind::BudgetExhausted);
}
