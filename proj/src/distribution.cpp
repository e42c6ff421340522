#include "mmspace/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmspace/error.hpp"

namespace mmspace {

namespace {

constexpr double kMergeGap = 1e-12;
constexpr double kDropWeight = 1e-15;

void check_values(const std::vector<Atom>& atoms) {
  if (atoms.empty()) throw Error(Errc::BadWeights, "distribution has no atoms");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (!std::isfinite(a.value) || a.value < -kTolerance || a.value > 1.0 + kTolerance)
      throw Error(Errc::DistanceOutOfRange,
                  "atom value " + std::to_string(a.value) + " outside [0,1]", {i});
    if (!std::isfinite(a.weight) || a.weight < 0.0)
      throw Error(Errc::BadWeights, "atom weight must be non-negative", {i});
  }
}

}  // namespace

DiscreteDistribution::DiscreteDistribution() : DiscreteDistribution(std::vector<Atom>{{0.0, 1.0}}) {}

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> canonical) : atoms_(std::move(canonical)) {
  cumulative_.reserve(atoms_.size());
  double run = 0.0;
  for (const Atom& a : atoms_) {
    run += a.weight;
    cumulative_.push_back(run);
  }
  cumulative_.back() = 1.0;
}

std::vector<Atom> DiscreteDistribution::canonicalize(std::vector<Atom> atoms) {
  for (Atom& a : atoms) a.value = std::clamp(a.value, 0.0, 1.0);
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& x, const Atom& y) { return x.value < y.value; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!merged.empty() && a.value - merged.back().value < kMergeGap)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  std::erase_if(merged, [](const Atom& a) { return a.weight < kDropWeight; });
  if (merged.empty()) throw Error(Errc::BadWeights, "distribution has no mass");
  double total = 0.0;
  for (const Atom& a : merged) total += a.weight;
  for (Atom& a : merged) a.weight /= total;
  return merged;
}

DiscreteDistribution DiscreteDistribution::point_mass(double value) {
  check_values({{value, 1.0}});
  return DiscreteDistribution(std::vector<Atom>{{std::clamp(value, 0.0, 1.0), 1.0}});
}

DiscreteDistribution DiscreteDistribution::from_atoms(std::vector<Atom> atoms) {
  check_values(atoms);
  double total = 0.0;
  for (const Atom& a : atoms) total += a.weight;
  if (std::abs(total - 1.0) > kTolerance)
    throw Error(Errc::BadWeights, "atom weights sum to " + std::to_string(total) + ", expected 1");
  return DiscreteDistribution(canonicalize(std::move(atoms)));
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<Atom> atoms) {
  check_values(atoms);
  return DiscreteDistribution(canonicalize(std::move(atoms)));
}

double DiscreteDistribution::mean() const {
  return expect([](double v) { return v; });
}

double DiscreteDistribution::quantile(double u) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return atoms_[static_cast<std::size_t>(it - cumulative_.begin())].value;
}

double d_ext(const DiscreteDistribution& mu, const DiscreteDistribution& nu) {
  // Both CDFs are step functions; walk the merged breakpoints and integrate
  // |F_mu - F_nu| piece by piece.
  auto a = mu.atoms();
  auto b = nu.atoms();
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  double prev = 0.0;
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i].value <= b[j].value))
      next = a[i].value;
    else
      next = b[j].value;
    total += std::abs(fa - fb) * (next - prev);
    while (i < a.size() && a[i].value == next) fa += a[i++].weight;
    while (j < b.size() && b[j].value == next) fb += b[j++].weight;
    prev = next;
  }
  // Past the last atom both CDFs equal 1.
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace mmspace
