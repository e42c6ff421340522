#pragma once

#include <span>
#include <vector>

namespace mmspace {

/// Absolute tolerance for every metric axiom and mass check.
inline constexpr double kTolerance = 1e-12;

struct Atom {
  double value;
  double weight;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finitely supported probability measure on [0,1], kept in canonical form:
/// values strictly increasing, atoms closer than 1e-12 merged, weights below
/// 1e-15 dropped, total mass renormalised to 1.
class DiscreteDistribution {
 public:
  /// The point mass at 0.
  DiscreteDistribution();

  static DiscreteDistribution point_mass(double value);
  /// Weights must already sum to 1 within kTolerance.
  static DiscreteDistribution from_atoms(std::vector<Atom> atoms);
  /// Rescales positive weights to total mass 1.
  static DiscreteDistribution normalized(std::vector<Atom> atoms);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool is_point_mass() const noexcept { return atoms_.size() == 1; }

  /// Smallest / largest support point (the "lower" and "upper" length).
  double min_value() const noexcept { return atoms_.front().value; }
  double max_value() const noexcept { return atoms_.back().value; }

  double mean() const;

  /// Expectation of f against this measure, summed atom by atom.
  template <typename F>
  double expect(F&& f) const {
    double sum = 0.0;
    for (const Atom& a : atoms_) sum += a.weight * f(a.value);
    return sum;
  }

  /// Inverse-CDF draw from a uniform u in [0,1).
  double quantile(double u) const;

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  explicit DiscreteDistribution(std::vector<Atom> canonical);
  static std::vector<Atom> canonicalize(std::vector<Atom> atoms);

  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

/// Kantorovich-Rubinstein distance on [0,1]: the integral of |F_mu - F_nu|.
double d_ext(const DiscreteDistribution& mu, const DiscreteDistribution& nu);

}  // namespace mmspace
