#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmspace/distribution.hpp"
#include "mmspace/space.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mmspace;

namespace {

Matrix rows(std::vector<std::vector<double>> r) { return matrix_from_rows(r); }

// Exact triangle-failure probability by direct enumeration of ordered
// triples of distinct points and all atom combinations.
double brute_validate(const QMMSpace& q) {
  const std::size_t n = q.size();
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        if (a == b || b == c || a == c) continue;
        double fail = 0.0;
        for (const auto& x : q.at(a, b).atoms())
          for (const auto& y : q.at(b, c).atoms())
            for (const auto& z : q.at(a, c).atoms()) {
              const bool bad = x.value > y.value + z.value + 1e-12 || y.value > x.value + z.value + 1e-12 ||
                               z.value > x.value + y.value + 1e-12;
              if (bad) fail += x.weight * y.weight * z.weight;
            }
        total += q.weight(a) * q.weight(b) * q.weight(c) * fail;
      }
  return total;
}

}  // namespace

TEST(FiniteMMSpace, AcceptsTwoPointMetric) {
  auto x = FiniteMMSpace::create({0.5, 0.5}, rows({{0, 1}, {1, 0}}));
  EXPECT_EQ(x.size(), 2u);
  EXPECT_FALSE(x.is_pseudometric());
}

TEST(FiniteMMSpace, RejectsAsymmetry) {
  EXPECT_ERRC(FiniteMMSpace::create({0.5, 0.5}, rows({{0, 1}, {0.9, 0}})), Errc::NonSymmetric);
}

TEST(FiniteMMSpace, NamesFirstTriangleViolation) {
  try {
    FiniteMMSpace::create({1.0 / 3, 1.0 / 3, 1.0 / 3}, rows({{0, 0.4, 1}, {0.4, 0, 0.4}, {1, 0.4, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TriangleViolation);
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{0, 1, 2}));
  }
}

TEST(FiniteMMSpace, RejectsBadWeightsAndShapes) {
  EXPECT_ERRC(FiniteMMSpace::create({0.5, 0.4}, rows({{0, 1}, {1, 0}})), Errc::BadWeights);
  EXPECT_ERRC(FiniteMMSpace::create({1.0, 0.0}, rows({{0, 1}, {1, 0}})), Errc::BadWeights);
  EXPECT_ERRC(FiniteMMSpace::create({1.0}, rows({{0, 1}, {1, 0}})), Errc::DimensionMismatch);
  EXPECT_ERRC(FiniteMMSpace::create({0.5, 0.5}, rows({{0.1, 1}, {1, 0}})), Errc::NonZeroDiagonal);
  EXPECT_ERRC(FiniteMMSpace::create({0.5, 0.5}, rows({{0, 1.5}, {1.5, 0}})), Errc::DistanceOutOfRange);
}

TEST(FiniteMMSpace, RoundTripRevalidates) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto x = oracle::random_space(7, rng);
    auto y = FiniteMMSpace::create(std::vector<double>(x.weights().begin(), x.weights().end()), x.dist());
    EXPECT_EQ(y.dist(), x.dist());
  }
}

TEST(Graph, CompleteGraphIsAllHalf) {
  auto x = from_graph({{false, true, true}, {true, false, true}, {true, true, false}});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(x.weight(i), 1.0 / 3);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(x.distance(i, j), i == j ? 0.0 : 0.5);
  }
}

TEST(Graph, EmptyAndPathGraphs) {
  auto e = from_graph({{false, false}, {false, false}});
  EXPECT_EQ(e.distance(0, 1), 1.0);
  std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}, {1, 2}};
  auto p = from_edges(3, edges);
  EXPECT_EQ(p.distance(0, 1), 0.5);
  EXPECT_EQ(p.distance(1, 2), 0.5);
  EXPECT_EQ(p.distance(0, 2), 1.0);
}

TEST(Graph, RejectsSelfLoopsAndAsymmetry) {
  EXPECT_ERRC(from_graph({{true, false}, {false, false}}), Errc::SelfLoop);
  EXPECT_ERRC(from_graph({{false, true}, {false, false}}), Errc::NonSymmetric);
}

TEST(Sphere, AntipodalAndIdenticalPoints) {
  auto x = sphere_from_directions({{1, 0, 0}, {-2, 0, 0}, {3, 0, 0}});
  EXPECT_DOUBLE_EQ(x.distance(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(x.distance(0, 2), 0.0);
  auto y = sphere_from_directions({{1, 0}, {0, 1}});
  EXPECT_NEAR(y.distance(0, 1), 0.5, 1e-15);
}

TEST(Sphere, HighDimensionConcentratesAtHalf) {
  auto x = sphere_empirical(50, 500, 1);
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) mean += x.distance(i, j);
  mean /= 500.0 * 499.0;
  EXPECT_NEAR(mean, 0.5, 0.05);
}

TEST(Sphere, SeedDeterminesSpace) {
  EXPECT_EQ(sphere_empirical(3, 20, 9).dist(), sphere_empirical(3, 20, 9).dist());
  EXPECT_NE(sphere_empirical(3, 20, 9).dist(), sphere_empirical(3, 20, 10).dist());
}

TEST(BlowUp, UnitMultiplicitiesIsIdentity) {
  std::mt19937_64 rng(2);
  auto x = oracle::random_space(5, rng);
  std::vector<std::size_t> m(5, 1);
  auto y = blow_up(x, m);
  EXPECT_EQ(y.dist(), x.dist());
  EXPECT_TRUE(std::equal(x.weights().begin(), x.weights().end(), y.weights().begin()));
}

TEST(BlowUp, SinglePointSplitsIntoZeroDistanceCopies) {
  auto x = FiniteMMSpace::create({1.0}, Matrix(1));
  std::vector<std::size_t> m{2};
  auto y = blow_up(x, m);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_EQ(y.weight(0), 0.5);
  EXPECT_EQ(y.distance(0, 1), 0.0);
  EXPECT_TRUE(y.is_pseudometric());
}

TEST(BlowUp, RejectsZeroMultiplicity) {
  auto x = FiniteMMSpace::create({0.5, 0.5}, rows({{0, 1}, {1, 0}}));
  std::vector<std::size_t> m{1, 0};
  EXPECT_ERRC(blow_up(x, m), Errc::ZeroMultiplicity);
}

TEST(BlowUp, PreservesMassAndInheritsDistances) {
  std::mt19937_64 rng(3);
  auto x = oracle::random_space(4, rng);
  std::vector<std::size_t> m{1, 3, 2, 1};
  auto y = blow_up(x, m);
  auto origin = blow_up_origin(m);
  double total = 0.0;
  for (double w : y.weights()) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) EXPECT_EQ(y.distance(i, j), x.distance(origin[i], origin[j]));
}

TEST(Distribution, CanonicalForm) {
  auto mu = DiscreteDistribution::normalized({{0.5, 1.0}, {0.2, 1.0}, {0.5 + 1e-13, 2.0}, {0.9, 1e-17}});
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu.atoms()[0].value, 0.2);
  EXPECT_NEAR(mu.atoms()[1].weight, 0.75, 1e-15);
  EXPECT_EQ(DiscreteDistribution(), DiscreteDistribution::point_mass(0.0));
}

TEST(Distribution, QuantileInvertsCdf) {
  auto mu = DiscreteDistribution::from_atoms({{0.1, 0.25}, {0.7, 0.75}});
  EXPECT_EQ(mu.quantile(0.0), 0.1);
  EXPECT_EQ(mu.quantile(0.2), 0.1);
  EXPECT_EQ(mu.quantile(0.3), 0.7);
  EXPECT_NEAR(mu.mean(), 0.1 * 0.25 + 0.7 * 0.75, 1e-15);
}

TEST(Dext, EndpointsAndIdentity) {
  EXPECT_DOUBLE_EQ(d_ext(DiscreteDistribution::point_mass(0), DiscreteDistribution::point_mass(1)), 1.0);
  std::mt19937_64 rng(4);
  auto mu = oracle::random_distribution(rng);
  EXPECT_EQ(d_ext(mu, mu), 0.0);
}

TEST(Dext, PointMassAgainstUniformGrid) {
  std::vector<Atom> atoms;
  for (int k = 0; k < 100; ++k) atoms.push_back({k / 100.0, 0.01});
  auto grid = DiscreteDistribution::normalized(atoms);
  const double v = d_ext(DiscreteDistribution::point_mass(0), grid);
  EXPECT_NEAR(v, 0.495, 1e-12);
  EXPECT_NEAR(v, oracle::transport_cost(DiscreteDistribution::point_mass(0), grid), 1e-9);
}

TEST(Dext, MatchesTransportOracle) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    auto mu = oracle::random_distribution(rng);
    auto nu = oracle::random_distribution(rng);
    EXPECT_NEAR(d_ext(mu, nu), oracle::transport_cost(mu, nu), 1e-9);
  }
}

TEST(Dext, IsAMetric) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 200; ++t) {
    auto a = oracle::random_distribution(rng);
    auto b = oracle::random_distribution(rng);
    auto c = oracle::random_distribution(rng);
    EXPECT_EQ(d_ext(a, b), d_ext(b, a));
    EXPECT_LE(d_ext(a, c), d_ext(a, b) + d_ext(b, c) + 1e-9);
    if (!(a == b)) {
      EXPECT_GT(d_ext(a, b), 0.0);
    }
  }
}

TEST(Qmm, LowerAndUpperMatrices) {
  std::mt19937_64 rng(6);
  auto x = oracle::random_space(5, rng);
  auto q = embed_mm(x);
  EXPECT_EQ(lower_matrix(q), x.dist());
  EXPECT_EQ(upper_matrix(q), x.dist());

  DistributionMatrix d(2);
  d(0, 1) = d(1, 0) = DiscreteDistribution::from_atoms({{0.3, 0.5}, {0.7, 0.5}});
  auto q2 = QMMSpace::create({0.5, 0.5}, d);
  EXPECT_EQ(lower_matrix(q2)(0, 1), 0.3);
  EXPECT_EQ(upper_matrix(q2)(0, 1), 0.7);
  EXPECT_EQ(lower_matrix(q2)(0, 0), 0.0);
}

TEST(Qmm, EmbedGraphAndPoint) {
  auto k2 = from_graph({{false, true}, {true, false}});
  EXPECT_EQ(embed_mm(k2).at(0, 1), DiscreteDistribution::point_mass(0.5));
  auto one = embed_mm(FiniteMMSpace::create({1.0}, Matrix(1)));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.at(0, 0), DiscreteDistribution());
}

TEST(Qmm, RejectsStructuralViolations) {
  DistributionMatrix d(2);
  d(0, 1) = DiscreteDistribution::point_mass(0.3);
  d(1, 0) = DiscreteDistribution::point_mass(0.4);
  EXPECT_ERRC(QMMSpace::create({0.5, 0.5}, d), Errc::NonSymmetric);
  d(1, 0) = d(0, 1);
  d(0, 0) = DiscreteDistribution::point_mass(0.1);
  EXPECT_ERRC(QMMSpace::create({0.5, 0.5}, d), Errc::NonZeroDiagonal);
}

TEST(ValidateQmm, EmbeddedMetricNeverFails) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) EXPECT_EQ(validate_qmm(embed_mm(oracle::random_space(6, rng))), 0.0);
}

TEST(ValidateQmm, OneBadAtom) {
  DistributionMatrix d(3);
  d(0, 1) = d(1, 0) = DiscreteDistribution::point_mass(0.2);
  d(1, 2) = d(2, 1) = DiscreteDistribution::point_mass(0.2);
  d(0, 2) = d(2, 0) = DiscreteDistribution::from_atoms({{0.1, 0.5}, {0.5, 0.5}});
  auto q = QMMSpace::create({1.0 / 3, 1.0 / 3, 1.0 / 3}, d);
  EXPECT_NEAR(validate_qmm(q), brute_validate(q), 1e-15);
  EXPECT_NEAR(validate_qmm(q), 6.0 / 27.0 * 0.5, 1e-15);
}

TEST(ValidateQmm, NarrowLawsNeverFail) {
  const auto law = DiscreteDistribution::from_atoms({{0.4, 1.0 / 3}, {0.5, 1.0 / 3}, {0.6, 1.0 / 3}});
  DistributionMatrix d(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) d(i, j) = law;
  EXPECT_EQ(validate_qmm(QMMSpace::create({0.25, 0.25, 0.25, 0.25}, d)), 0.0);
}

TEST(ValidateQmm, MatchesBruteForceOnRandomLaws) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4;
    DistributionMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = oracle::random_distribution(rng, 3);
    auto q = QMMSpace::create(oracle::random_weights(n, rng), d);
    EXPECT_NEAR(validate_qmm(q), brute_validate(q), 1e-14);
  }
}

TEST(Permuted, RelabelsPoints) {
  std::mt19937_64 rng(9);
  auto x = oracle::random_space(5, rng);
  std::vector<std::size_t> perm{3, 1, 4, 0, 2};
  auto y = permuted(x, perm);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(y.weight(i), x.weight(perm[i]));
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(y.distance(i, j), x.distance(perm[i], perm[j]));
  }
}

TEST(Target, ValidatesFiniteTargets) {
  EXPECT_ERRC(Target::finite(rows({{0, 1.5}, {1.5, 0}})), Errc::BadTarget);
  auto y = Target::finite(rows({{0, 0.5}, {0.5, 0}}));
  EXPECT_EQ(y.size(), 2u);
  EXPECT_DOUBLE_EQ(y.diameter(), 0.5);
  EXPECT_TRUE(Target::interval().is_interval());
}
