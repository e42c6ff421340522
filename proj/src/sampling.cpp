#include "mmspace/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mmspace/error.hpp"
#include "mmspace/kernels.hpp"
#include "mmspace/rng.hpp"

namespace mmspace {

namespace {

std::discrete_distribution<std::size_t> point_sampler(std::span<const double> weights) {
  return std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

void check_tractable(std::size_t n, std::size_t r) {
  if (std::pow(static_cast<double>(n), static_cast<double>(r)) > kMaxExactTuples)
    throw Error(Errc::TooLarge, "n^r = " + std::to_string(n) + "^" + std::to_string(r) + " exceeds the exact limit",
                {n, r});
}

template <typename TableFor>
double t_exact_with(const GSystem& g, std::span<const double> weights, TableFor&& table_for) {
  check_tractable(weights.size(), g.order());
  std::map<std::string, Matrix> cache;
  kernels::TupleSum problem;
  problem.weights = weights;
  problem.order = g.order();
  problem.pairs = g.off_diagonal_pairs();
  for (auto [i, j] : problem.pairs) {
    const TestFunction& f = g.at(i, j);
    auto it = cache.find(f.id());
    if (it == cache.end()) it = cache.emplace(f.id(), table_for(f)).first;
  }
  for (auto [i, j] : problem.pairs) problem.tables.push_back(&cache.at(g.at(i, j).id()));
  return g.diagonal_constant() * kernels::tuple_sum(problem);
}

}  // namespace

double t_exact(const GSystem& g, std::span<const double> weights, const Matrix& lengths) {
  if (lengths.size() != weights.size()) throw Error(Errc::DimensionMismatch, "weights and lengths disagree");
  return t_exact_with(g, weights, [&](const TestFunction& f) {
    Matrix t(lengths.size());
    for (std::size_t a = 0; a < lengths.size(); ++a)
      for (std::size_t b = 0; b < lengths.size(); ++b) t(a, b) = f(lengths(a, b));
    return t;
  });
}

double t_exact(const GSystem& g, std::span<const double> weights, const DistributionMatrix& lengths) {
  if (lengths.size() != weights.size()) throw Error(Errc::DimensionMismatch, "weights and lengths disagree");
  return t_exact_with(g, weights, [&](const TestFunction& f) {
    Matrix t(lengths.size());
    for (std::size_t a = 0; a < lengths.size(); ++a)
      for (std::size_t b = 0; b < lengths.size(); ++b) t(a, b) = f.integrate(lengths(a, b));
    return t;
  });
}

double t_exact(const GSystem& g, const FiniteMMSpace& space) { return t_exact(g, space.weights(), space.dist()); }

double t_exact(const GSystem& g, const QMMSpace& space) { return t_exact(g, space.weights(), space.dstar()); }

double t_of_sample(const GSystem& g, const SampleMatrix& sample) {
  std::vector<double> w(sample.n(), 1.0 / static_cast<double>(sample.n()));
  return t_exact(g, w, sample.entries);
}

SampleMatrix sample_matrix(const FiniteMMSpace& space, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidArgument, "sample size must be >= 1");
  Rng rng(seed);
  auto pick = point_sampler(space.weights());
  SampleMatrix s{Matrix(n), std::vector<std::size_t>(n)};
  for (auto& p : s.points) p = pick(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s.entries(i, j) = space.distance(s.points[i], s.points[j]);
  return s;
}

SampleMatrix sample_matrix(const QMMSpace& space, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidArgument, "sample size must be >= 1");
  Rng rng(seed);
  auto pick = point_sampler(space.weights());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleMatrix s{Matrix(n), std::vector<std::size_t>(n)};
  for (auto& p : s.points) p = pick(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      s.entries(i, j) = s.entries(j, i) = space.at(s.points[i], s.points[j]).quantile(unit(rng));
  return s;
}

Estimate t_monte_carlo(const GSystem& g, const FiniteMMSpace& space, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(Errc::InvalidArgument, "samples must be >= 1");
  const auto pairs = g.off_diagonal_pairs();
  std::vector<const TestFunction*> funcs;
  for (auto [i, j] : pairs) funcs.push_back(&g.at(i, j));
  const double diag = g.diagonal_constant();
  auto stats = kernels::monte_carlo(samples, seed, [&] {
    return [&, pick = point_sampler(space.weights()), idx = std::vector<std::size_t>(g.order())](Rng& rng) mutable {
      for (auto& a : idx) a = pick(rng);
      double v = diag;
      for (std::size_t p = 0; p < pairs.size(); ++p)
        v *= (*funcs[p])(space.distance(idx[pairs[p].first], idx[pairs[p].second]));
      return v;
    };
  });
  return {stats.mean, stats.standard_error(), stats.count};
}

Estimate t_monte_carlo(const GSystem& g, const QMMSpace& space, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(Errc::InvalidArgument, "samples must be >= 1");
  const auto pairs = g.off_diagonal_pairs();
  std::vector<const TestFunction*> funcs;
  for (auto [i, j] : pairs) funcs.push_back(&g.at(i, j));
  const double diag = g.diagonal_constant();
  auto stats = kernels::monte_carlo(samples, seed, [&] {
    return [&, pick = point_sampler(space.weights()), unit = std::uniform_real_distribution<double>(0.0, 1.0),
            idx = std::vector<std::size_t>(g.order())](Rng& rng) mutable {
      for (auto& a : idx) a = pick(rng);
      double v = diag;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double len = space.at(idx[pairs[p].first], idx[pairs[p].second]).quantile(unit(rng));
        v *= (*funcs[p])(len);
      }
      return v;
    };
  });
  return {stats.mean, stats.standard_error(), stats.count};
}

double azuma_bound(double c_g, double epsilon, std::uint64_t n) {
  if (!(epsilon > 0.0)) throw Error(Errc::NonPositiveEpsilon, "epsilon must be positive");
  if (n < 1) throw Error(Errc::InvalidArgument, "n must be >= 1");
  if (!(c_g > 0.0)) return 0.0;
  return std::min(1.0, 2.0 * std::exp(-epsilon * epsilon * static_cast<double>(n) / (2.0 * c_g)));
}

double azuma_bound(const GSystem& g, double epsilon, std::uint64_t n) { return azuma_bound(g.c_g(), epsilon, n); }

double chernoff_bound(double delta, std::uint64_t m) {
  if (!(delta > 0.0)) throw Error(Errc::NonPositiveDelta, "delta must be positive");
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be >= 1");
  return std::min(1.0, 2.0 * std::exp(-delta * delta * static_cast<double>(m) / 2.0));
}

const MomentEntry* MomentSignature::find(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

std::vector<unsigned> canonical_powers(std::size_t order, const std::vector<unsigned>& powers) {
  const std::size_t m = order * (order - 1) / 2;
  if (powers.size() != m) throw Error(Errc::DimensionMismatch, "expected r(r-1)/2 powers");
  // pair_index(i, j) for i < j in lexicographic order.
  std::vector<std::size_t> pair_index(order * order, 0);
  std::size_t p = 0;
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = i + 1; j < order; ++j) pair_index[i * order + j] = pair_index[j * order + i] = p++;
  std::vector<std::size_t> sigma(order);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::vector<unsigned> best = powers, candidate(m);
  do {
    for (std::size_t i = 0; i < order; ++i)
      for (std::size_t j = i + 1; j < order; ++j)
        candidate[pair_index[sigma[i] * order + sigma[j]]] = powers[pair_index[i * order + j]];
    if (candidate < best) best = candidate;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

std::vector<std::vector<unsigned>> canonical_power_assignments(std::size_t order, unsigned k_max) {
  if (order < 2) throw Error(Errc::InvalidArgument, "order must be >= 2");
  const std::size_t m = order * (order - 1) / 2;
  if (std::pow(static_cast<double>(k_max) + 1.0, static_cast<double>(m)) > 1e6)
    throw Error(Errc::TooLarge, "too many power assignments", {order, k_max});
  std::set<std::vector<unsigned>> reps;
  std::vector<unsigned> cur(m, 0);
  while (true) {
    reps.insert(canonical_powers(order, cur));
    std::size_t k = m;
    bool done = true;
    while (k > 0) {
      --k;
      if (++cur[k] <= k_max) {
        done = false;
        break;
      }
      cur[k] = 0;
    }
    if (done) break;
  }
  return {reps.begin(), reps.end()};
}

namespace {

template <typename PowerTable, typename DrawPower>
MomentSignature signature_impl(std::span<const double> weights, const SignatureOptions& options,
                               PowerTable&& power_table, DrawPower&& make_factor_drawer) {
  if (options.r_max < 2) throw Error(Errc::InvalidArgument, "r_max must be >= 2");
  if (options.k_max < 1) throw Error(Errc::InvalidArgument, "k_max must be >= 1");
  const std::size_t n = weights.size();

  std::vector<Matrix> tables;
  auto ensure_tables = [&] {
    if (tables.empty())
      for (unsigned k = 0; k <= options.k_max; ++k) tables.push_back(power_table(k));
  };

  std::vector<MomentEntry> entries;
  std::uint64_t stream = 0;
  for (std::size_t r = 2; r <= options.r_max; ++r) {
    const double tuples = std::pow(static_cast<double>(n), static_cast<double>(r));
    bool exact = false;
    switch (options.mode) {
      case MomentMode::Exact:
        check_tractable(n, r);
        exact = true;
        break;
      case MomentMode::MonteCarlo: exact = false; break;
      case MomentMode::Auto: exact = tuples <= options.exact_limit; break;
    }
    for (const auto& powers : canonical_power_assignments(r, options.k_max)) {
      MomentEntry e;
      e.order = r;
      e.powers = powers;
      e.key = GSystem::monomials(r, powers).id();
      e.exact = exact;
      const std::uint64_t entry_seed = derive_seed(options.seed, stream++);
      kernels::TupleSum problem;
      problem.weights = weights;
      problem.order = r;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) problem.pairs.emplace_back(i, j);
      if (exact) {
        ensure_tables();
        for (unsigned k : powers) problem.tables.push_back(&tables[k]);
        e.estimate = kernels::tuple_sum(problem);
        e.standard_error = 0.0;
        e.samples = static_cast<std::uint64_t>(std::min(tuples, 1.8e19));
      } else {
        if (options.samples < 1) throw Error(Errc::InvalidArgument, "samples must be >= 1");
        auto stats = kernels::monte_carlo(options.samples, entry_seed,
                                          [&] { return make_factor_drawer(problem.pairs, powers); });
        e.estimate = stats.mean;
        e.standard_error = stats.standard_error();
        e.samples = stats.count;
      }
      entries.push_back(std::move(e));
    }
  }
  return MomentSignature(options, std::move(entries));
}

double int_pow(double x, unsigned k) {
  double r = 1.0;
  for (unsigned i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

MomentSignature moment_signature(const FiniteMMSpace& space, const SignatureOptions& options) {
  const std::size_t n = space.size();
  return signature_impl(
      space.weights(), options,
      [&](unsigned k) {
        Matrix t(n);
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) t(a, b) = int_pow(space.distance(a, b), k);
        return t;
      },
      [&](const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const std::vector<unsigned>& powers) {
        const std::size_t r = pairs.empty() ? 1 : pairs.back().second + 1;
        return [&, pick = point_sampler(space.weights()), idx = std::vector<std::size_t>(r)](Rng& rng) mutable {
          for (auto& a : idx) a = pick(rng);
          double v = 1.0;
          for (std::size_t p = 0; p < pairs.size(); ++p)
            v *= int_pow(space.distance(idx[pairs[p].first], idx[pairs[p].second]), powers[p]);
          return v;
        };
      });
}

MomentSignature moment_signature(const QMMSpace& space, const SignatureOptions& options) {
  const std::size_t n = space.size();
  return signature_impl(
      space.weights(), options,
      [&](unsigned k) {
        Matrix t(n);
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b)
            t(a, b) = space.at(a, b).expect([k](double v) { return int_pow(v, k); });
        return t;
      },
      [&](const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const std::vector<unsigned>& powers) {
        const std::size_t r = pairs.empty() ? 1 : pairs.back().second + 1;
        return [&, pick = point_sampler(space.weights()), unit = std::uniform_real_distribution<double>(0.0, 1.0),
                idx = std::vector<std::size_t>(r)](Rng& rng) mutable {
          for (auto& a : idx) a = pick(rng);
          double v = 1.0;
          for (std::size_t p = 0; p < pairs.size(); ++p)
            v *= int_pow(space.at(idx[pairs[p].first], idx[pairs[p].second]).quantile(unit(rng)), powers[p]);
          return v;
        };
      });
}

}  // namespace mmspace
