#include "mmspace/invariants.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "mmspace/error.hpp"
#include "mmspace/rng.hpp"

namespace mmspace {

LipschitzWitness LipschitzWitness::interval_map(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] >= 0.0 && values[i] <= 1.0))
      throw Error(Errc::BadTarget, "interval map value outside [0,1]", {i});
  LipschitzWitness w;
  w.values = std::move(values);
  return w;
}

LipschitzWitness LipschitzWitness::finite_map(Target target, std::vector<std::size_t> labels) {
  if (target.is_interval()) throw Error(Errc::BadTarget, "finite_map needs a finite target");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= target.size()) throw Error(Errc::DimensionMismatch, "label outside the target", {i});
  LipschitzWitness w;
  w.target = std::move(target);
  w.labels = std::move(labels);
  return w;
}

double LipschitzWitness::image_distance(std::size_t i, std::size_t j) const {
  if (target.is_interval()) return std::abs(values[i] - values[j]);
  return target.dist()(labels[i], labels[j]);
}

LipschitzCheck lipschitz_check(const Matrix& lower, const LipschitzWitness& witness) {
  if (witness.size() != lower.size())
    throw Error(Errc::DimensionMismatch, "witness has " + std::to_string(witness.size()) + " values for " +
                                             std::to_string(lower.size()) + " points");
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lower.size(); ++i)
    for (std::size_t j = i + 1; j < lower.size(); ++j)
      slack = std::min(slack, lower(i, j) - witness.image_distance(i, j));
  return {slack >= -kTolerance, slack};
}

LipschitzCheck lipschitz_check(const FiniteMMSpace& space, const LipschitzWitness& witness) {
  return lipschitz_check(space.dist(), witness);
}

LipschitzCheck lipschitz_check(const QMMSpace& space, const LipschitzWitness& witness) {
  return lipschitz_check(lower_matrix(space), witness);
}

namespace {

PushforwardMeasure pushforward_weights(std::span<const double> weights, const Matrix& lower,
                                       const LipschitzWitness& witness, bool certified) {
  if (certified) {
    if (!lipschitz_check(lower, witness).ok) throw Error(Errc::NotLipschitz, "map is not 1-Lipschitz");
  } else if (witness.size() != weights.size()) {
    throw Error(Errc::DimensionMismatch, "witness size does not match the space");
  }
  if (witness.target.is_interval()) {
    std::vector<Atom> atoms;
    atoms.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) atoms.push_back({witness.values[i], weights[i]});
    return PushforwardMeasure::on_interval(DiscreteDistribution::normalized(std::move(atoms)));
  }
  std::vector<double> mass(witness.target.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) mass[witness.labels[i]] += weights[i];
  double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return PushforwardMeasure::on_finite(witness.target, std::move(mass));
}

// Max-mass clique search on at most 64 vertices. Stops as soon as `goal` is
// reached.
class CliqueSearch {
 public:
  CliqueSearch(std::vector<std::uint64_t> adjacency, std::vector<double> mass, double goal)
      : adj_(std::move(adjacency)), mass_(std::move(mass)), goal_(goal) {}

  double run() {
    const std::size_t n = mass_.size();
    const std::uint64_t all = n == 64 ? ~0ULL : ((1ULL << n) - 1);
    expand(all, 0.0);
    return best_;
  }

 private:
  double mass_of(std::uint64_t set) const {
    double m = 0.0;
    while (set) {
      m += mass_[static_cast<std::size_t>(std::countr_zero(set))];
      set &= set - 1;
    }
    return m;
  }

  void expand(std::uint64_t candidates, double current) {
    if (best_ >= goal_) return;
    if (candidates == 0) {
      best_ = std::max(best_, current);
      return;
    }
    if (current + mass_of(candidates) <= best_) return;
    const auto v = static_cast<std::size_t>(std::countr_zero(candidates));
    const std::uint64_t bit = 1ULL << v;
    expand(candidates & adj_[v], current + mass_[v]);
    expand(candidates & ~bit, current);
  }

  std::vector<std::uint64_t> adj_;
  std::vector<double> mass_;
  double goal_;
  double best_ = 0.0;
};

double greedy_clique(const Matrix& d, const std::vector<std::size_t>& support, std::span<const double> weights,
                     double threshold) {
  std::vector<std::size_t> order = support;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  double best = 0.0;
  for (std::size_t start : order) {
    std::vector<std::size_t> clique{start};
    double m = weights[start];
    for (std::size_t v : order) {
      if (v == start) continue;
      bool ok = true;
      for (std::size_t u : clique)
        if (d(u, v) > threshold + kTolerance) {
          ok = false;
          break;
        }
      if (ok) {
        clique.push_back(v);
        m += weights[v];
      }
    }
    best = std::max(best, m);
  }
  return best;
}

PartialDiameter finite_partial_diameter(const Matrix& d, std::span<const double> weights, double kappa) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 1e-15) support.push_back(i);
  const double need = 1.0 - kappa - kTolerance;
  const bool exact = support.size() <= kMaxExactCliquePoints;

  std::vector<double> candidates{0.0};
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = a + 1; b < support.size(); ++b) candidates.push_back(d(support[a], support[b]));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto feasible = [&](double threshold) {
    if (!exact) return greedy_clique(d, support, weights, threshold) >= need;
    std::vector<std::uint64_t> adj(support.size(), 0);
    std::vector<double> mass(support.size());
    for (std::size_t a = 0; a < support.size(); ++a) {
      mass[a] = weights[support[a]];
      for (std::size_t b = 0; b < support.size(); ++b)
        if (a != b && d(support[a], support[b]) <= threshold) adj[a] |= 1ULL << b;
    }
    return CliqueSearch(std::move(adj), std::move(mass), need).run() >= need;
  };

  // Feasibility is monotone in D and the largest candidate always works.
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return {candidates[lo], !exact};
}

// Sliding window over sorted (value, weight) pairs.
double interval_window(std::span<const std::pair<double, double>> sorted, double need) {
  double best = std::numeric_limits<double>::infinity();
  double mass = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    while (j < sorted.size() && mass < need) mass += sorted[j++].second;
    if (mass < need) break;
    best = std::min(best, sorted[j - 1].first - sorted[i].first);
    mass -= sorted[i].second;
  }
  return std::isfinite(best) ? std::max(best, 0.0) : 1.0;
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(Errc::InvalidArgument, "kappa must lie in (0,1)");
}

}  // namespace

PushforwardMeasure pushforward(const FiniteMMSpace& space, const LipschitzWitness& witness, bool certified) {
  return pushforward_weights(space.weights(), space.dist(), witness, certified);
}

PushforwardMeasure pushforward(const QMMSpace& space, const LipschitzWitness& witness, bool certified) {
  return pushforward_weights(space.weights(), lower_matrix(space), witness, certified);
}

PartialDiameter partial_diameter(const PushforwardMeasure& measure, double kappa) {
  check_kappa(kappa);
  if (measure.is_interval()) {
    std::vector<std::pair<double, double>> atoms;
    for (const Atom& a : measure.interval_measure().atoms()) atoms.emplace_back(a.value, a.weight);
    return {interval_window(atoms, 1.0 - kappa - kTolerance), false};
  }
  return finite_partial_diameter(measure.carrier().dist(), measure.point_weights(), kappa);
}

namespace {

class IntervalClimber {
 public:
  IntervalClimber(std::span<const double> weights, const Matrix& lower, double kappa)
      : w_(weights), lower_(lower), need_(1.0 - kappa - kTolerance), scratch_(weights.size()) {}

  double evaluate(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) scratch_[i] = {values[i], w_[i]};
    std::sort(scratch_.begin(), scratch_.end());
    return interval_window(scratch_, need_);
  }

  // Range of values point i may take while staying 1-Lipschitz.
  std::pair<double, double> feasible_range(std::span<const double> values, std::size_t i) const {
    double lo = 0.0, hi = 1.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (j == i) continue;
      lo = std::max(lo, values[j] - lower_(i, j));
      hi = std::min(hi, values[j] + lower_(i, j));
    }
    return {lo, hi};
  }

 private:
  std::span<const double> w_;
  const Matrix& lower_;
  double need_;
  std::vector<std::pair<double, double>> scratch_;
};

ObsDiamResult obs_diam_interval(std::span<const double> weights, const Matrix& lower, double kappa,
                                const ObsDiamBudget& budget, Rng& rng) {
  const std::size_t n = weights.size();
  IntervalClimber climber(weights, lower, kappa);
  std::vector<std::size_t> seeds(n);
  std::iota(seeds.begin(), seeds.end(), 0);
  std::shuffle(seeds.begin(), seeds.end(), rng);
  const std::size_t seed_count = budget.seed_points == 0 ? n : std::min(n, budget.seed_points);

  std::vector<double> best(n, 0.0);
  double best_value = 0.0;
  for (std::size_t s = 0; s < seed_count; ++s) {
    const std::size_t p = seeds[s];
    std::vector<double> f(n);
    for (std::size_t x = 0; x < n; ++x) f[x] = std::clamp(lower(x, p), 0.0, 1.0);
    if (!lipschitz_check(lower, LipschitzWitness::interval_map(f)).ok) continue;
    const double v = climber.evaluate(f);
    if (v > best_value) {
      best_value = v;
      best = std::move(f);
    }
  }

  const std::size_t iterations = budget.iterations.value_or(20 * n);
  std::vector<double> current = best;
  double current_value = best_value;
  std::uniform_int_distribution<std::size_t> pick_point(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t it = 0; it < iterations && n > 1; ++it) {
    const std::size_t i = pick_point(rng);
    const auto [lo, hi] = climber.feasible_range(current, i);
    const double u = unit(rng);
    double proposal;
    if (u < 0.25)
      proposal = lo;
    else if (u < 0.5)
      proposal = hi;
    else
      proposal = lo + (hi - lo) * unit(rng);
    if (!(lo <= hi) || proposal == current[i]) continue;
    const double old = current[i];
    current[i] = proposal;
    const double v = climber.evaluate(current);
    if (v >= current_value) {
      current_value = v;
      if (v > best_value) {
        best_value = v;
        best = current;
      }
    } else {
      current[i] = old;
    }
  }

  ObsDiamResult result;
  result.witness = LipschitzWitness::interval_map(std::move(best));
  return result;
}

class FiniteClimber {
 public:
  FiniteClimber(std::span<const double> weights, const Matrix& lower, const Target& target, double kappa)
      : w_(weights), lower_(lower), target_(target), kappa_(kappa) {}

  PartialDiameter evaluate(const std::vector<std::size_t>& labels) const {
    std::vector<double> mass(target_.size(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) mass[labels[i]] += w_[i];
    return finite_partial_diameter(target_.dist(), mass, kappa_);
  }

  bool can_take(const std::vector<std::size_t>& labels, std::size_t i, std::size_t y) const {
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (j != i && lower_(i, j) < target_.dist()(y, labels[j]) - kTolerance) return false;
    return true;
  }

 private:
  std::span<const double> w_;
  const Matrix& lower_;
  const Target& target_;
  double kappa_;
};

ObsDiamResult obs_diam_finite(std::span<const double> weights, const Matrix& lower, const Target& target,
                              double kappa, const ObsDiamBudget& budget, Rng& rng) {
  const std::size_t n = weights.size();
  const std::size_t ny = target.size();
  FiniteClimber climber(weights, lower, target, kappa);
  std::vector<std::size_t> seeds(n);
  std::iota(seeds.begin(), seeds.end(), 0);
  std::shuffle(seeds.begin(), seeds.end(), rng);
  const std::size_t seed_count = budget.seed_points == 0 ? n : std::min(n, budget.seed_points);

  // A diametral pair of Y.
  std::size_t y0 = 0, y1 = 0;
  for (std::size_t a = 0; a < ny; ++a)
    for (std::size_t b = 0; b < ny; ++b)
      if (target.dist()(a, b) > target.dist()(y0, y1)) y0 = a, y1 = b;

  std::vector<std::size_t> best(n, y0);
  PartialDiameter best_value = climber.evaluate(best);
  for (std::size_t s = 0; s < seed_count && y0 != y1; ++s) {
    const std::size_t p = seeds[s];
    for (auto [from, to] : {std::pair{y0, y1}, std::pair{y1, y0}}) {
      std::vector<std::size_t> labels(n, from);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lower(a, p) > lower(b, p); });
      // Keep the best prefix of the sweep.
      std::vector<std::size_t> moved;
      std::size_t keep = 0;
      PartialDiameter sweep_best = climber.evaluate(labels);
      for (std::size_t x : order) {
        if (!climber.can_take(labels, x, to)) continue;
        labels[x] = to;
        moved.push_back(x);
        const auto v = climber.evaluate(labels);
        if (v.value > sweep_best.value) sweep_best = v, keep = moved.size();
      }
      for (std::size_t k = keep; k < moved.size(); ++k) labels[moved[k]] = from;
      if (sweep_best.value > best_value.value) {
        best_value = sweep_best;
        best = std::move(labels);
      }
    }
  }

  const std::size_t iterations = budget.iterations.value_or(20 * n);
  std::vector<std::size_t> current = best;
  PartialDiameter current_value = best_value;
  std::uniform_int_distribution<std::size_t> pick_point(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_label(0, ny - 1);
  for (std::size_t it = 0; it < iterations && ny > 1; ++it) {
    const std::size_t i = pick_point(rng);
    const std::size_t y = pick_label(rng);
    if (y == current[i] || !climber.can_take(current, i, y)) continue;
    const std::size_t old = current[i];
    current[i] = y;
    const auto v = climber.evaluate(current);
    if (v.value >= current_value.value) {
      current_value = v;
      if (v.value > best_value.value) {
        best_value = v;
        best = current;
      }
    } else {
      current[i] = old;
    }
  }
  ObsDiamResult result;
  result.witness = LipschitzWitness::finite_map(target, std::move(best));
  result.approximate = best_value.approximate;
  return result;
}

ObsDiamResult obs_diam_impl(std::span<const double> weights, const Matrix& lower, const Target& target, double kappa,
                            const ObsDiamBudget& budget, std::uint64_t seed) {
  check_kappa(kappa);
  if (target.diameter() > 1.0 + kTolerance) throw Error(Errc::BadTarget, "target diameter exceeds 1");
  Rng rng(seed);
  ObsDiamResult result = target.is_interval() ? obs_diam_interval(weights, lower, kappa, budget, rng)
                                              : obs_diam_finite(weights, lower, target, kappa, budget, rng);
  // Report the value of the certified witness itself, recomputed from the
  // canonical pushforward.
  const auto check = lipschitz_check(lower, result.witness);
  if (!check.ok) throw Error(Errc::NotLipschitz, "internal: obs_diam produced a non-Lipschitz witness");
  result.witness.slack = check.slack;
  const auto pd = partial_diameter(pushforward_weights(weights, lower, result.witness, false), kappa);
  result.lower_bound = pd.value;
  result.approximate = result.approximate || pd.approximate;
  return result;
}

double obs_diam_exact_impl(std::span<const double> weights, const Matrix& lower, const Target& target, double kappa) {
  check_kappa(kappa);
  if (target.is_interval()) throw Error(Errc::BadTarget, "exact ObsDiam needs a finite target");
  const std::size_t n = weights.size();
  const std::size_t ny = target.size();
  if (std::pow(static_cast<double>(ny), static_cast<double>(n)) > 1e7)
    throw Error(Errc::TooLarge, "|Y|^n exceeds 1e7", {ny, n});
  const Matrix& dy = target.dist();
  std::vector<std::size_t> labels(n, 0);
  std::vector<double> mass(ny, 0.0);
  double best = 0.0;

  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      std::vector<double> m = mass;
      const double total = std::accumulate(m.begin(), m.end(), 0.0);
      for (double& v : m) v /= total;
      best = std::max(best, finite_partial_diameter(dy, m, kappa).value);
      return;
    }
    for (std::size_t y = 0; y < ny; ++y) {
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = lower(i, j) >= dy(y, labels[j]) - kTolerance;
      if (!ok) continue;
      labels[i] = y;
      mass[y] += weights[i];
      self(self, i + 1);
      mass[y] -= weights[i];
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace

ObsDiamResult obs_diam(const FiniteMMSpace& space, const Target& target, double kappa, const ObsDiamBudget& budget,
                       std::uint64_t seed) {
  return obs_diam_impl(space.weights(), space.dist(), target, kappa, budget, seed);
}

ObsDiamResult obs_diam(const QMMSpace& space, const Target& target, double kappa, const ObsDiamBudget& budget,
                       std::uint64_t seed) {
  return obs_diam_impl(space.weights(), lower_matrix(space), target, kappa, budget, seed);
}

double obs_diam_exact_small(const FiniteMMSpace& space, const Target& target, double kappa) {
  return obs_diam_exact_impl(space.weights(), space.dist(), target, kappa);
}

double obs_diam_exact_small(const QMMSpace& space, const Target& target, double kappa) {
  return obs_diam_exact_impl(space.weights(), lower_matrix(space), target, kappa);
}

// ---------------------------------------------------------------------------
// Separation

namespace {

struct SeparationProblem {
  std::span<const double> weights;
  const Matrix& lower;
  std::span<const double> kappas;
};

double min_cross(const Matrix& lower, const std::vector<std::size_t>& assignment) {
  double m = 1.0;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    for (std::size_t j = i + 1; j < assignment.size(); ++j)
      if (assignment[i] != 0 && assignment[j] != 0 && assignment[i] != assignment[j]) m = std::min(m, lower(i, j));
  return m;
}

std::vector<double> class_masses(std::span<const double> weights, std::size_t classes,
                                 const std::vector<std::size_t>& assignment) {
  std::vector<double> m(classes, 0.0);
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != 0) m[assignment[i] - 1] += weights[i];
  return m;
}

// Depth-first search over per-point labels, heaviest points first.
class ExactSeparation {
 public:
  ExactSeparation(const SeparationProblem& p, double delta) : p_(p), n_(p.weights.size()), classes_(p.kappas.size()) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return p.weights[a] > p.weights[b]; });
    conflict_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && p.lower(i, j) < delta - kTolerance) conflict_[i] |= 1U << j;
    suffix_.assign(n_ + 1, 0.0);
    for (std::size_t k = n_; k-- > 0;) suffix_[k] = suffix_[k + 1] + p.weights[order_[k]];
    members_.assign(classes_, 0);
    mass_.assign(classes_, 0.0);
    labels_.assign(n_, 0);
  }

  bool solve() { return recurse(0); }
  const std::vector<std::size_t>& labels() const { return labels_; }

 private:
  double deficit() const {
    double d = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) d += std::max(0.0, p_.kappas[c] - mass_[c] - kTolerance);
    return d;
  }

  bool recurse(std::size_t k) {
    const double need = deficit();
    if (need <= 0.0) return true;
    if (k == n_ || need > suffix_[k] + kTolerance) return false;
    const std::size_t i = order_[k];
    const std::uint32_t bit = 1U << i;
    // Classes sorted by remaining deficit, largest first.
    std::vector<std::size_t> cls(classes_);
    std::iota(cls.begin(), cls.end(), 0);
    std::stable_sort(cls.begin(), cls.end(), [&](std::size_t a, std::size_t b) {
      return p_.kappas[a] - mass_[a] > p_.kappas[b] - mass_[b];
    });
    for (std::size_t c : cls) {
      if (mass_[c] >= p_.kappas[c] - kTolerance) continue;
      // Empty classes with equal kappa are interchangeable; try only the first.
      bool duplicate = false;
      for (std::size_t e = 0; e < c && !duplicate; ++e)
        duplicate = members_[e] == 0 && members_[c] == 0 && p_.kappas[e] == p_.kappas[c];
      if (duplicate) continue;
      bool ok = true;
      for (std::size_t o = 0; o < classes_ && ok; ++o)
        if (o != c && (members_[o] & conflict_[i])) ok = false;
      if (!ok) continue;
      members_[c] |= bit;
      mass_[c] += p_.weights[i];
      labels_[i] = c + 1;
      if (recurse(k + 1)) return true;
      members_[c] &= ~bit;
      mass_[c] -= p_.weights[i];
      labels_[i] = 0;
    }
    return recurse(k + 1);
  }

  const SeparationProblem& p_;
  std::size_t n_;
  std::size_t classes_;
  std::vector<std::size_t> order_;
  std::vector<std::uint32_t> conflict_;
  std::vector<double> suffix_;
  std::vector<std::uint32_t> members_;
  std::vector<double> mass_;
  std::vector<std::size_t> labels_;
};

bool satisfied(std::span<const double> kappas, const std::vector<double>& masses) {
  for (std::size_t c = 0; c < kappas.size(); ++c)
    if (masses[c] < kappas[c] - kTolerance) return false;
  return true;
}

// Whole components of the conflict graph go to the neediest class, then
// discarded points are pulled into classes where they conflict with nothing.
std::optional<std::vector<std::size_t>> heuristic_assignment(const SeparationProblem& p, double delta) {
  const std::size_t n = p.weights.size();
  const std::size_t classes = p.kappas.size();
  std::vector<std::size_t> component(n, n);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < n; ++s) {
    if (component[s] != n) continue;
    comps.emplace_back();
    std::vector<std::size_t> stack{s};
    component[s] = comps.size() - 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      comps.back().push_back(v);
      for (std::size_t u = 0; u < n; ++u)
        if (component[u] == n && p.lower(u, v) < delta - kTolerance) {
          component[u] = comps.size() - 1;
          stack.push_back(u);
        }
    }
  }
  std::vector<double> comp_mass(comps.size(), 0.0);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::size_t v : comps[c]) comp_mass[c] += p.weights[v];
  std::vector<std::size_t> by_mass(comps.size());
  std::iota(by_mass.begin(), by_mass.end(), 0);
  std::stable_sort(by_mass.begin(), by_mass.end(), [&](std::size_t a, std::size_t b) { return comp_mass[a] > comp_mass[b]; });

  std::vector<std::size_t> labels(n, 0);
  std::vector<double> mass(classes, 0.0);
  for (std::size_t c : by_mass) {
    std::size_t target = classes;
    double worst = kTolerance;
    for (std::size_t k = 0; k < classes; ++k)
      if (p.kappas[k] - mass[k] > worst) worst = p.kappas[k] - mass[k], target = k;
    if (target == classes) break;
    for (std::size_t v : comps[c]) labels[v] = target + 1;
    mass[target] += comp_mass[c];
  }
  if (satisfied(p.kappas, mass)) return labels;

  // Point-level repair: a class that is short may absorb discarded points and
  // points of over-full classes, as long as no conflict appears.
  bool changed = true;
  while (changed && !satisfied(p.kappas, mass)) {
    changed = false;
    for (std::size_t k = 0; k < classes; ++k) {
      if (mass[k] >= p.kappas[k] - kTolerance) continue;
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t from = labels[v];
        if (from == k + 1) continue;
        if (from != 0 && mass[from - 1] - p.weights[v] < p.kappas[from - 1] - kTolerance) continue;
        bool ok = true;
        for (std::size_t u = 0; u < n && ok; ++u)
          if (u != v && labels[u] != 0 && labels[u] != k + 1 && p.lower(u, v) < delta - kTolerance) ok = false;
        if (!ok) continue;
        if (from != 0) mass[from - 1] -= p.weights[v];
        labels[v] = k + 1;
        mass[k] += p.weights[v];
        changed = true;
        if (mass[k] >= p.kappas[k] - kTolerance) break;
      }
    }
  }
  if (satisfied(p.kappas, mass)) return labels;
  return std::nullopt;
}

SeparationResult make_result(const SeparationProblem& p, double delta, std::vector<std::size_t> labels,
                             SearchMode mode) {
  SeparationResult r;
  r.delta = delta;
  r.mode = mode;
  r.witness.delta = delta;
  r.witness.masses = class_masses(p.weights, p.kappas.size(), labels);
  r.witness.min_cross_distance = min_cross(p.lower, labels);
  r.witness.assignment = std::move(labels);
  return r;
}

}  // namespace

SeparationResult separation(std::span<const double> weights, const Matrix& lower, std::span<const double> kappas,
                            SearchMode mode) {
  const std::size_t n = weights.size();
  if (lower.size() != n) throw Error(Errc::DimensionMismatch, "weights and distances disagree");
  if (kappas.size() < 2) throw Error(Errc::InvalidArgument, "separation needs at least two kappas");
  double total = 0.0;
  for (std::size_t c = 0; c < kappas.size(); ++c) {
    if (!(kappas[c] > 0.0 && kappas[c] < 1.0)) throw Error(Errc::InvalidArgument, "kappa must lie in (0,1)", {c});
    total += kappas[c];
  }
  if (total > 1.0 + kTolerance) throw Error(Errc::InfeasibleKappas, "kappas sum to more than 1");
  if (mode == SearchMode::Exact && n > kMaxExactSeparationPoints)
    throw Error(Errc::ExactBudgetExceeded, "exact separation is limited to 18 points", {n});

  const SeparationProblem problem{weights, lower, kappas};
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) candidates.push_back(lower(i, j));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  if (mode == SearchMode::Exact) {
    auto attempt = [&](double delta) -> std::optional<std::vector<std::size_t>> {
      ExactSeparation search(problem, delta);
      if (search.solve()) return search.labels();
      return std::nullopt;
    };
    auto base = attempt(0.0);
    if (!base) throw Error(Errc::InfeasibleKappas, "no disjoint classes reach the requested masses");
    // Largest feasible candidate; feasibility is monotone in delta.
    std::size_t lo = 0, hi = candidates.size() - 1;
    std::vector<std::size_t> best = *base;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (auto labels = attempt(candidates[mid])) {
        lo = mid;
        best = std::move(*labels);
      } else {
        hi = mid - 1;
      }
    }
    if (lo == 0) best = *base;
    return make_result(problem, candidates[lo], std::move(best), mode);
  }

  for (std::size_t k = candidates.size(); k-- > 0;) {
    if (auto labels = heuristic_assignment(problem, candidates[k]))
      return make_result(problem, candidates[k], std::move(*labels), mode);
  }
  if (n <= kMaxExactSeparationPoints) {
    ExactSeparation search(problem, 0.0);
    if (search.solve()) return make_result(problem, 0.0, search.labels(), mode);
  }
  throw Error(Errc::InfeasibleKappas, "no disjoint classes reach the requested masses");
}

SeparationResult separation(const FiniteMMSpace& space, std::span<const double> kappas, SearchMode mode) {
  return separation(space.weights(), space.dist(), kappas, mode);
}

SeparationResult separation(const QMMSpace& space, std::span<const double> kappas, SearchMode mode) {
  return separation(space.weights(), lower_matrix(space), kappas, mode);
}

bool verify_separation(std::span<const double> weights, const Matrix& lower, std::span<const double> kappas,
                       const SeparationWitness& witness) {
  if (witness.assignment.size() != weights.size()) return false;
  for (std::size_t label : witness.assignment)
    if (label > kappas.size()) return false;
  const auto masses = class_masses(weights, kappas.size(), witness.assignment);
  if (!satisfied(kappas, masses)) return false;
  return min_cross(lower, witness.assignment) >= witness.delta - kTolerance;
}

}  // namespace mmspace
