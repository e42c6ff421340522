#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmspace/distances.hpp"
#include "mmspace/sampling.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mmspace;

namespace {

GridKernel kernel(const std::vector<double>& w, const Matrix& m) { return GridKernel::values(w, m); }

Matrix constant_matrix(std::size_t n, double c) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m(i, j) = c;
  return m;
}

FiniteMMSpace complete(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return from_edges(n, edges);
}

}  // namespace

TEST(GridKernel, Validation) {
  EXPECT_ERRC(GridKernel::values({0.5, 0.4}, Matrix(2)), Errc::BadWeights);
  EXPECT_ERRC(GridKernel::values({0.5, 0.5}, Matrix(3)), Errc::DimensionMismatch);
  EXPECT_ERRC(GridKernel::values({0.5, 0.5}, matrix_from_rows({{0, 0.1}, {0.2, 0}})), Errc::NonSymmetric);
  EXPECT_ERRC(GridKernel::values({0.5, 0.5}, matrix_from_rows({{0.1, 0}, {0, 0}})), Errc::NonZeroDiagonal);
  EXPECT_ERRC(GridKernel::values({0.5, 0.5}, matrix_from_rows({{0, 2}, {2, 0}})), Errc::DistanceOutOfRange);
  // no triangle inequality needed
  EXPECT_NO_THROW(GridKernel::values({0.25, 0.25, 0.5}, matrix_from_rows({{0, 1, 0.1}, {1, 0, 0.1}, {0.1, 0.1, 0}})));
}

TEST(Box1, IdenticalIsZero) {
  std::mt19937_64 rng(50);
  auto w = oracle::random_weights(7, rng);
  auto f = kernel(w, oracle::random_kernel(7, rng));
  auto r = box1(f, f);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.bad_pair_mass, 0.0);
}

TEST(Box1, ConstantShift) {
  for (std::size_t n : {3u, 6u, 10u})
    for (double c : {0.05, 0.3, 0.9}) {
      std::vector<double> w(n, 1.0 / n);
      auto f = kernel(w, Matrix(n)), g = kernel(w, constant_matrix(n, c));
      const double want = oracle::box1_subsets(f, g);
      EXPECT_NEAR(box1(f, g).value, want, 1e-12);
      EXPECT_NEAR(want, std::min(c, 1.0 - 1.0 / n), 1e-12);
    }
}

TEST(Box1, OneRowDeviation) {
  for (double w0 : {0.05, 0.2, 0.4}) {
    std::vector<double> w = {w0, (1 - w0) / 3, (1 - w0) / 3, (1 - w0) / 3};
    Matrix a(4), b(4);
    for (std::size_t j = 1; j < 4; ++j) b(0, j) = b(j, 0) = 1.0;
    auto r = box1(kernel(w, a), kernel(w, b));
    EXPECT_NEAR(r.value, w0, 1e-12);
    EXPECT_EQ(r.cover, (std::vector<std::size_t>{0}));
  }
}

TEST(Box1, MatchesSubsetOracle) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 9;
    auto w = oracle::random_weights(n, rng, trial % 2 == 0);
    auto base = oracle::random_kernel(n, rng);
    auto f = kernel(w, base);
    auto g = kernel(w, oracle::perturbed_kernel(base, rng, 0.05, trial % 3));
    auto r = box1(f, g);
    EXPECT_NEAR(r.value, oracle::box1_subsets(f, g), 1e-12);
    EXPECT_TRUE(r.exact);
    EXPECT_LE(r.cover_weight, r.value + 1e-12);
    EXPECT_LE(r.threshold, r.value + 1e-12);
    // witness: every cell pair outside the cover deviates by at most threshold
    std::vector<bool> covered(n, false);
    for (auto c : r.cover) covered[c] = true;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (!covered[a] && !covered[b]) {
          EXPECT_LE(f.deviation(g, a, b), r.threshold + 1e-12);
        }
  }
}

TEST(Box1, PseudometricProperties) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + trial % 5;
    auto w = oracle::random_weights(n, rng);
    auto f = kernel(w, oracle::random_kernel(n, rng));
    auto g = kernel(w, oracle::random_kernel(n, rng));
    auto h = kernel(w, oracle::random_kernel(n, rng));
    const double fg = box1(f, g).value, gf = box1(g, f).value;
    EXPECT_DOUBLE_EQ(fg, gf);
    EXPECT_LE(box1(f, h).value, fg + box1(g, h).value + 1e-12);
    EXPECT_GE(fg, 0.0);
    EXPECT_LE(fg, 1.0);
  }
}

TEST(Box1, BoundsBracketExactValue) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 6 + trial % 6;
    auto w = oracle::random_weights(n, rng);
    auto base = oracle::random_kernel(n, rng);
    auto f = kernel(w, base);
    auto g = kernel(w, oracle::perturbed_kernel(base, rng, 0.1, 2));
    auto r = box1(f, g, {4, true});
    const double exact = oracle::box1_subsets(f, g);
    EXPECT_EQ(r.exact, r.lo == r.hi);
    EXPECT_LE(r.lo, exact + 1e-12);
    EXPECT_GE(r.hi, exact - 1e-12);
    EXPECT_EQ(r.value, r.hi);
  }
}

TEST(Box1, LargeGridGivesBounds) {
  std::mt19937_64 rng(54);
  const std::size_t n = 40;
  auto w = oracle::random_weights(n, rng, true);
  auto base = oracle::random_kernel(n, rng);
  auto f = kernel(w, base);
  auto g = kernel(w, oracle::perturbed_kernel(base, rng, 0.02, 3));
  auto r = box1(f, g);
  EXPECT_EQ(r.exact, r.lo == r.hi);
  EXPECT_LE(r.lo, r.hi);
  EXPECT_ERRC(box1(f, g, {30, false}), Errc::CoverBudgetExceeded);
}

TEST(Box1, GridMismatch) {
  auto f = kernel({0.5, 0.5}, Matrix(2));
  auto g = kernel({1.0 / 3, 1.0 / 3, 1.0 / 3}, Matrix(3));
  EXPECT_ERRC(box1(f, g), Errc::GridMismatch);
  auto h = kernel({0.4, 0.6}, Matrix(2));
  EXPECT_ERRC(box1(f, h), Errc::GridMismatch);
  std::mt19937_64 rng(55);
  auto x = oracle::random_space(2, rng, true);
  EXPECT_ERRC(box1(GridKernel::of(x), GridKernel::of(embed_mm(x))), Errc::GridMismatch);
}

TEST(Box1, LawCellsUseExtDistance) {
  DistributionMatrix a(2, DiscreteDistribution::point_mass(0.0)), b = a;
  a(0, 1) = a(1, 0) = DiscreteDistribution::point_mass(0.2);
  b(0, 1) = b(1, 0) = DiscreteDistribution::normalized({{0.2, 1}, {0.6, 1}});
  auto f = GridKernel::laws({0.5, 0.5}, a), g = GridKernel::laws({0.5, 0.5}, b);
  EXPECT_NEAR(f.deviation(g, 0, 1), 0.2, 1e-12);
  EXPECT_NEAR(box1(f, g).value, 0.2, 1e-12);
}

TEST(Refinement, SplitsAtCumulativeSums) {
  auto cells = common_refinement(std::vector<double>{0.5, 0.5}, std::vector<double>{0.25, 0.75});
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].x, 0u);
  EXPECT_EQ(cells[0].y, 0u);
  EXPECT_NEAR(cells[0].weight, 0.25, 1e-15);
  EXPECT_EQ(cells[1].x, 0u);
  EXPECT_EQ(cells[1].y, 1u);
  EXPECT_EQ(cells[2].x, 1u);
  EXPECT_EQ(cells[2].y, 1u);
  double total = 0.0;
  for (const auto& c : cells) total += c.weight;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Underline, SelfIsZeroWithIdentity) {
  std::mt19937_64 rng(56);
  auto x = oracle::random_space(5, rng);
  auto r = underline_box1(x, x);
  EXPECT_EQ(r.upper_bound, 0.0);
  for (std::size_t c = 0; c < r.permutation.size(); ++c) EXPECT_EQ(r.permutation[c], c);
}

TEST(Underline, BlowUpIsZero) {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = oracle::random_space(3, rng);
    std::vector<std::size_t> m = {2, 1, 3};
    EXPECT_EQ(underline_box1(x, blow_up(x, m)).upper_bound, 0.0);
  }
}

TEST(Underline, CompleteGraphAgainstUnitPair) {
  auto k2 = complete(2);
  auto y = FiniteMMSpace::create({0.5, 0.5}, matrix_from_rows({{0, 1}, {1, 0}}));
  auto r = underline_box1(k2, y);
  EXPECT_DOUBLE_EQ(r.upper_bound, 0.5);
  EXPECT_DOUBLE_EQ(oracle::box1_subsets(GridKernel::of(k2), GridKernel::of(y)), 0.5);
}

TEST(Underline, FindsPermutedCopy) {
  std::mt19937_64 rng(58);
  auto x = oracle::random_space(6, rng, true);
  std::vector<std::size_t> perm = {3, 1, 5, 0, 2, 4};
  auto y = permuted(x, perm);
  EXPECT_GT(box1(GridKernel::of(x), GridKernel::of(y)).value, 0.0);
  EXPECT_EQ(underline_box1(x, y).upper_bound, 0.0);
}

TEST(Underline, NotAboveIdentityAlignment) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 15; ++trial) {
    auto x = oracle::random_space(5, rng, true);
    auto y = oracle::random_space(5, rng, true);
    auto r = underline_box1(x, y);
    EXPECT_LE(r.upper_bound, box1(GridKernel::of(x), GridKernel::of(y)).value + 1e-12);
    EXPECT_NEAR(underline_box1(y, x).upper_bound, r.upper_bound, 1e-12);
  }
}

TEST(Underline, AnnealIsDeterministicAndNoWorseThanIdentity) {
  std::mt19937_64 rng(60);
  auto x = oracle::random_space(12, rng, true);
  auto y = oracle::random_space(12, rng, true);
  AlignOptions opt;
  opt.mode = AlignMode::Anneal;
  opt.seed = 4;
  opt.iterations = 500;
  auto a = underline_box1(x, y, opt);
  auto b = underline_box1(x, y, opt);
  EXPECT_EQ(a.upper_bound, b.upper_bound);
  EXPECT_EQ(a.permutation, b.permutation);
  EXPECT_LE(a.upper_bound, box1(GridKernel::of(x), GridKernel::of(y)).value + 1e-12);
  EXPECT_FALSE(a.exact);
}

TEST(Underline, ZeroImpliesEqualSignatures) {
  std::mt19937_64 rng(61);
  auto x = oracle::random_space(4, rng, true);
  std::vector<std::size_t> m = {2, 2, 1, 1};
  // copies of the first two points are shuffled among themselves
  std::vector<std::size_t> perm = {2, 0, 3, 1, 5, 4};
  auto y = permuted(blow_up(x, m), perm);
  ASSERT_EQ(underline_box1(x, y).upper_bound, 0.0);
  SignatureOptions opt{3, 2, 100, 1, MomentMode::Exact};
  auto a = moment_signature(x, opt), b = moment_signature(y, opt);
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    EXPECT_NEAR(a.entries()[i].estimate, b.entries()[i].estimate, 1e-12);
}

TEST(Underline, Errors) {
  std::mt19937_64 rng(62);
  auto x = oracle::random_space(5, rng);
  auto y = oracle::random_space(7, rng);
  AlignOptions small;
  small.cell_cap = 3;
  EXPECT_ERRC(underline_box1(x, y, small), Errc::RefinementTooLarge);
  auto u = oracle::random_space(10, rng, true);
  auto v = oracle::random_space(10, rng, true);
  EXPECT_ERRC(underline_box1(u, v), Errc::ExactBudgetExceeded);
  EXPECT_ERRC(underline_box1(GridKernel::of(x), GridKernel::of(embed_mm(x))), Errc::GridMismatch);
}

TEST(Underline, QmmSelfIsZero) {
  std::mt19937_64 rng(63);
  auto q = embed_mm(oracle::random_space(4, rng));
  EXPECT_EQ(underline_box1(q, q).upper_bound, 0.0);
}

TEST(GridT, MatchesSpaceT) {
  std::mt19937_64 rng(64);
  auto x = oracle::random_space(5, rng);
  auto g = GSystem::monomials(3, {1, 2, 1});
  EXPECT_NEAR(t_exact(g, GridKernel::of(x)), t_exact(g, x), 1e-14);
  auto q = embed_mm(x);
  EXPECT_NEAR(t_exact(g, GridKernel::of(q)), t_exact(g, q), 1e-14);
}

TEST(MomentBound, ZeroEpsLeavesCoverTerm) {
  auto g = GSystem::monomials(3, {1, 1, 1});
  EXPECT_NEAR(moment_discrepancy_bound(g, 0.0, 1.0, 0.1), 2 * 1 * 6 * 0.1, 1e-15);
  EXPECT_EQ(moment_discrepancy_bound(g, 0.0, 1.0, 0.0), 0.0);
  EXPECT_ERRC(moment_discrepancy_bound(g, -0.1, 1.0, 0.0), Errc::InvalidArgument);
  EXPECT_ERRC(moment_discrepancy_bound(GSystem::monomials(2, {3}), 0.1, 1.0, 0.0), Errc::InvalidArgument);
}

TEST(MomentBound, HoldsOnRandomKernelPairs) {
  std::mt19937_64 rng(65);
  std::uniform_int_distribution<unsigned> power(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 8;
    auto w = oracle::random_weights(n, rng);
    auto base = oracle::random_kernel(n, rng);
    auto f = kernel(w, base);
    auto h = kernel(w, oracle::perturbed_kernel(base, rng, 0.03, trial % 3));
    const std::size_t r = 2 + trial % 3;
    std::vector<unsigned> powers(r * (r - 1) / 2);
    for (auto& p : powers) p = power(rng);
    auto g = GSystem::monomials(r, powers);
    auto witness = box1(f, h);
    const double diff = std::abs(t_exact(g, f) - t_exact(g, h));
    EXPECT_LE(diff, moment_discrepancy_bound(g, witness, g.lipschitz()) + 1e-12);
    EXPECT_LE(diff, moment_discrepancy_bound(g, witness.value, g.lipschitz()) + 1e-12);
  }
}

TEST(MomentBound, PrintedFormFailsOnUniformShift) {
  // every cell moves by 0.01: box1 = 0.01 with an empty cover
  const std::size_t n = 6;
  std::vector<double> w(n, 1.0 / n);
  auto f = kernel(w, constant_matrix(n, 0.5)), h = kernel(w, constant_matrix(n, 0.51));
  auto g = GSystem::monomials(3, {1, 1, 1});
  auto witness = box1(f, h);
  ASSERT_NEAR(witness.value, 0.01, 1e-12);
  ASSERT_EQ(witness.bad_pair_mass, 0.0);
  const double diff = std::abs(t_exact(g, f) - t_exact(g, h));
  EXPECT_GT(diff, printed_moment_discrepancy_bound(g, 0.01, 1.0, 0.0));
  EXPECT_LE(diff, moment_discrepancy_bound(g, witness, 1.0));
}
