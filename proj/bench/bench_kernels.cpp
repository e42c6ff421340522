// OpenMP kernels against their serial references.
//
//   ./build/bench/mmspace_bench --benchmark_filter=TupleSum

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mmspace/kernels.hpp"
#include "mmspace/sampling.hpp"

using namespace mmspace;

namespace {

struct Fixture {
  std::vector<double> weights;
  std::vector<Matrix> tables;
  kernels::TupleSum problem;

  Fixture(std::size_t n, std::size_t r) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = i + 1; j < r; ++j) {
        Matrix m(n);
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = a + 1; b < n; ++b) m(a, b) = m(b, a) = u(rng);
        tables.push_back(std::move(m));
      }
    problem.weights = weights;
    problem.order = r;
    std::size_t t = 0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = i + 1; j < r; ++j) {
        problem.pairs.emplace_back(i, j);
        problem.tables.push_back(&tables[t++]);
      }
  }
};

void BM_TupleSum(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::tuple_sum(f.problem));
}

void BM_TupleSumSerial(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::tuple_sum_serial(f.problem));
}

void monte_carlo_run(benchmark::State& state, bool parallel) {
  auto x = sphere_empirical(8, 200, 3);
  const auto g = GSystem::monomials(3, {1, 2, 1});
  const auto pairs = g.off_diagonal_pairs();
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto stats = kernels::monte_carlo(
        samples, 7,
        [&] {
          return [&, pick = std::uniform_int_distribution<std::size_t>(0, x.size() - 1),
                  idx = std::vector<std::size_t>(3)](Rng& rng) mutable {
            for (auto& a : idx) a = pick(rng);
            double v = 1.0;
            for (std::size_t p = 0; p < pairs.size(); ++p)
              v *= g.at(pairs[p].first, pairs[p].second)(x.distance(idx[pairs[p].first], idx[pairs[p].second]));
            return v;
          };
        },
        parallel);
    benchmark::DoNotOptimize(stats.mean);
  }
}

void BM_MonteCarlo(benchmark::State& state) { monte_carlo_run(state, true); }
void BM_MonteCarloSerial(benchmark::State& state) { monte_carlo_run(state, false); }

}  // namespace

BENCHMARK(BM_TupleSum)->Args({60, 3})->Args({30, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TupleSumSerial)->Args({60, 3})->Args({30, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Arg(1 << 18)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
