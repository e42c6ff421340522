// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mmspace/convergence.hpp"
#include "mmspace/distances.hpp"
#include "mmspace/error.hpp"
#include "mmspace/invariants.hpp"
#include "mmspace/sampling.hpp"
#include "oracles.hpp"

using namespace mmspace;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

FiniteMMSpace complete(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return from_edges(n, edges);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

QMMSpace random_qmm(std::size_t n, std::mt19937_64& rng) {
  DistributionMatrix d(n, DiscreteDistribution::point_mass(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = oracle::random_distribution(rng, 4);
  return QMMSpace::create(oracle::random_weights(n, rng, true), std::move(d));
}

// Separation result, or -1 when the kappas are infeasible.
double sep_or_infeasible(const std::function<SeparationResult()>& f) {
  try {
    return f().delta;
  } catch (const Error& e) {
    if (e.code() == Errc::InfeasibleKappas) return -1.0;
    throw;
  }
}

Outcome complete_graph_separation() {
  const std::vector<double> kappas = {0.3, 0.3};
  for (std::size_t n = 4; n <= 12; ++n) {
    const double d = separation(complete(n), kappas, SearchMode::Exact).delta;
    if (d != 0.5) return {false, fmt("n=%g gave %g", double(n), d)};
  }
  return {true, "delta = 0.5 for n = 4..12"};
}

Outcome sphere_concentration() {
  std::vector<double> v;
  for (std::size_t dim : {2u, 8u, 32u}) {
    auto x = sphere_empirical(dim, 400, derive_seed(kDefaultSeed, dim));
    v.push_back(obs_diam(x, Target::interval(), 0.1, {0, 0}, kDefaultSeed).lower_bound);
  }
  const bool ok = v[0] > v[1] && v[1] > v[2] && v[2] < 0.5 * v[0];
  return {ok, fmt("obs_diam dims 2/8/32 = %.4f / %.4f / %.4f", v[0], v[1], v[2])};
}

Outcome common_limit() {
  SequenceSpec a, b;
  a.family = Family::CompleteGraphs;
  a.indices = {40, 80};
  b.family = Family::Spheres;
  b.indices = {32, 64};
  ConvergenceOptions o;
  o.r_max = 3;
  o.k_max = 2;
  o.tol = 0.05;
  auto r = compare_limits(a, b, o);
  double worst = 0.0;
  for (const auto& g : r.gaps) worst = std::max(worst, g.gap);
  return {r.same_limit, fmt("same_limit over %g moments, largest gap %.4f", double(r.gaps.size()), worst)};
}

Outcome azuma_certificate() {
  std::mt19937_64 rng(404);
  auto x = oracle::random_space(6, rng);
  auto g = GSystem::monomials(2, {1});
  const double exact = t_exact(g, x);
  const int seeds = 10000;
  std::string detail;
  bool ok = true;
  for (std::size_t n : {50u, 200u}) {
    std::vector<double> dev(seeds);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < seeds; ++s)
      dev[s] = std::abs(t_of_sample(g, sample_matrix(x, n, derive_seed(n, static_cast<std::uint64_t>(s)))) - exact);
    for (double eps : {0.05, 0.1}) {
      int hits = 0;
      for (double d : dev) hits += d >= eps;
      const double freq = static_cast<double>(hits) / seeds;
      const double bound = azuma_bound(g, eps, n);
      const double slack = 3.0 * std::sqrt(bound * (1.0 - bound) / seeds);
      ok = ok && freq <= bound + slack;
      detail += fmt("n=%g eps=%g: %.4f", double(n), eps, freq) + fmt(" <= %.4f; ", bound + slack);
    }
  }
  return {ok, detail};
}

Outcome blow_up_invariance() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> size(2, 6), mult(1, 3);
  std::uniform_real_distribution<double> kap(0.1, 0.4);
  const SignatureOptions sig{3, 3, 1, 0, MomentMode::Exact};
  double worst = 0.0;
  int spaces = 0;
  while (spaces < 50) {
    const std::size_t n = size(rng);
    auto x = oracle::random_space(n, rng);
    std::vector<double> kappas = {kap(rng), kap(rng)};
    const double sep = sep_or_infeasible([&] { return separation(x, kappas, SearchMode::Exact); });
    if (sep < 0) continue;  // only feasible originals are compared
    std::vector<std::size_t> m(n);
    std::size_t total = 0;
    for (auto& k : m) total += (k = mult(rng));
    if (total > 12) continue;
    auto y = blow_up(x, m);
    auto target = Target::finite(oracle::random_metric(3, rng));
    auto sx = moment_signature(x, sig), sy = moment_signature(y, sig);
    for (std::size_t i = 0; i < sx.entries().size(); ++i)
      worst = std::max(worst, std::abs(sx.entries()[i].estimate - sy.entries()[i].estimate));
    worst = std::max(worst, std::abs(sep - separation(y, kappas, SearchMode::Exact).delta));
    const double kappa = kap(rng);
    worst = std::max(worst, std::abs(obs_diam_exact_small(x, target, kappa) - obs_diam_exact_small(y, target, kappa)));
    ++spaces;
  }
  return {worst <= 1e-12, fmt("50 spaces, largest difference %.3g", worst)};
}

Outcome oracle_equivalences() {
  std::mt19937_64 rng(606);
  double dext = 0.0, box = 0.0, pdiam = 0.0;
  int heuristic_above = 0;
  for (int i = 0; i < 500; ++i) {
    auto mu = oracle::random_distribution(rng, 8), nu = oracle::random_distribution(rng, 8);
    dext = std::max(dext, std::abs(d_ext(mu, nu) - oracle::transport_cost(mu, nu)));
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + i % 9;
    auto w = oracle::random_weights(n, rng, i % 2 == 0);
    auto base = oracle::random_kernel(n, rng);
    auto f = GridKernel::values(w, base);
    auto g = GridKernel::values(w, oracle::perturbed_kernel(base, rng, 0.05, i % 3));
    box = std::max(box, std::abs(box1(f, g).value - oracle::box1_subsets(f, g)));
  }
  std::uniform_real_distribution<double> kap(0.05, 0.9);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + i % 12;
    auto d = oracle::random_metric(n, rng);
    auto w = oracle::random_weights(n, rng);
    const double kappa = kap(rng);
    const double got = partial_diameter(PushforwardMeasure::on_finite(Target::finite(d), w), kappa).value;
    pdiam = std::max(pdiam, std::abs(got - oracle::partial_diameter_subsets(d, w, kappa)));
  }
  std::uniform_real_distribution<double> sk(0.05, 0.4);
  for (int i = 0; i < 200; ++i) {
    auto x = oracle::random_space(2 + i % 9, rng);
    const std::vector<double> kappas = {sk(rng), sk(rng)};
    const double exact = sep_or_infeasible([&] { return separation(x, kappas, SearchMode::Exact); });
    const double heur = sep_or_infeasible([&] { return separation(x, kappas, SearchMode::Heuristic); });
    if (heur > exact + 1e-12) ++heuristic_above;
  }
  const bool ok = dext <= 1e-9 && box <= 1e-12 && pdiam == 0.0 && heuristic_above == 0;
  return {ok, fmt("d_ext %.2g, box1 %.2g, pdiam %.2g", dext, box, pdiam) +
                  fmt(", heuristic above exact %g", double(heuristic_above))};
}

Outcome moment_continuity() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<unsigned> power(0, 2);
  int violations = 0;
  double tightest = 1e300;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 3 + i % 8;
    auto w = oracle::random_weights(n, rng);
    auto base = oracle::random_kernel(n, rng);
    auto f1 = GridKernel::values(w, base);
    auto f2 = GridKernel::values(w, oracle::perturbed_kernel(base, rng, 0.01 + 0.001 * (i % 50), i % 3));
    const std::size_t r = 2 + i % 3;
    std::vector<unsigned> powers(r * (r - 1) / 2);
    for (auto& p : powers) p = power(rng);
    auto g = GSystem::monomials(r, powers);
    const double diff = std::abs(t_exact(g, f1) - t_exact(g, f2));
    const double bound = moment_discrepancy_bound(g, box1(f1, f2), g.lipschitz());
    if (diff > bound + 1e-12) ++violations;
    tightest = std::min(tightest, bound - diff);
  }
  return {violations == 0, fmt("%g violations, smallest margin %.3g", double(violations), tightest)};
}

Outcome qmm_reduction() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> kap(0.1, 0.4);
  int mismatches = 0, nonzero = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + i % 8;
    auto q = random_qmm(n, rng);
    const std::vector<double> kappas = {kap(rng), kap(rng)};
    auto lower = lower_matrix(q);
    const double a = sep_or_infeasible([&] { return separation(q, kappas, SearchMode::Exact); });
    const double b = sep_or_infeasible([&] { return separation(q.weights(), lower, kappas, SearchMode::Exact); });
    if (a != b) ++mismatches;
    if (validate_qmm(embed_mm(oracle::random_space(n + 1, rng))) != 0.0) ++nonzero;
  }
  return {mismatches == 0 && nonzero == 0,
          fmt("%g separation mismatches, %g nonzero validate_qmm", double(mismatches), double(nonzero))};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;  // 0 = no time limit
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"complete-graph separation", 1.0, complete_graph_separation},
      {"sphere concentration", 30.0, sphere_concentration},
      {"common limit", 60.0, common_limit},
      {"azuma certificate", 120.0, azuma_certificate},
      {"blow-up invariance", 0.0, blow_up_invariance},
      {"oracle equivalences", 0.0, oracle_equivalences},
      {"moment continuity", 0.0, moment_continuity},
      {"qmm reduction", 0.0, qmm_reduction},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += fmt(" [over the %gs limit]", c.limit_seconds);
    }
    failed += !o.pass;
    std::printf("%s %d %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", index, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
