#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmspace/space.hpp"

namespace mmspace {

/// A map f from the points of a space into a Target, plus its certified
/// Lipschitz slack: min over pairs of (lower distance - target distance).
struct LipschitzWitness {
  Target target = Target::interval();
  /// f(x_i) for interval targets.
  std::vector<double> values;
  /// Index of f(x_i) in Y for finite targets.
  std::vector<std::size_t> labels;
  double slack = 0.0;

  static LipschitzWitness interval_map(std::vector<double> values);
  static LipschitzWitness finite_map(Target target, std::vector<std::size_t> labels);

  std::size_t size() const noexcept { return target.is_interval() ? values.size() : labels.size(); }
  double image_distance(std::size_t i, std::size_t j) const;
};

struct LipschitzCheck {
  bool ok = false;
  /// +infinity for one-point spaces (no pairs).
  double slack = 0.0;
};

/// 1-Lipschitz test against the lower distance matrix: true iff
/// lower(i,j) >= d_Y(f(x_i), f(x_j)) - kTolerance for all i != j.
/// Throws DimensionMismatch.
LipschitzCheck lipschitz_check(const Matrix& lower, const LipschitzWitness& witness);
LipschitzCheck lipschitz_check(const FiniteMMSpace& space, const LipschitzWitness& witness);
LipschitzCheck lipschitz_check(const QMMSpace& space, const LipschitzWitness& witness);

/// f_*(mu). With `certified`, throws NotLipschitz unless the map passes
/// lipschitz_check.
PushforwardMeasure pushforward(const FiniteMMSpace& space, const LipschitzWitness& witness, bool certified = true);
PushforwardMeasure pushforward(const QMMSpace& space, const LipschitzWitness& witness, bool certified = true);

/// Exact clique search is used up to this many support points of a finite
/// carrier; beyond it a greedy clique gives an upper bound flagged approximate.
inline constexpr std::size_t kMaxExactCliquePoints = 24;

struct PartialDiameter {
  double value = 0.0;
  bool approximate = false;
};

/// diam(nu, kappa): least D such that some set of diameter <= D carries mass
/// >= 1 - kappa. Throws InvalidArgument unless 0 < kappa < 1.
PartialDiameter partial_diameter(const PushforwardMeasure& measure, double kappa);

struct ObsDiamBudget {
  /// Distance-to-point seed maps tried (0 = every point).
  std::size_t seed_points = 0;
  /// Local-search moves after seeding (unset = 20 per point, 0 = seeds only).
  std::optional<std::size_t> iterations;
};

struct ObsDiamResult {
  /// Best partial diameter found: a certified lower bound on ObsDiam.
  double lower_bound = 0.0;
  LipschitzWitness witness;
  bool approximate = false;
};

/// Lower bound on ObsDiam_Y(X, kappa) with a certified 1-Lipschitz witness.
/// Seeds with distance-to-point maps (interval) or greedy two-label maps
/// (finite Y), then hill-climbs on single-point moves that stay inside the
/// Lipschitz constraints. Deterministic for a fixed seed; a larger budget
/// never lowers the result. Throws BadTarget.
ObsDiamResult obs_diam(const FiniteMMSpace& space, const Target& target, double kappa, const ObsDiamBudget& budget,
                       std::uint64_t seed);
ObsDiamResult obs_diam(const QMMSpace& space, const Target& target, double kappa, const ObsDiamBudget& budget,
                       std::uint64_t seed);

/// Exact ObsDiam into a finite Y by enumerating every 1-Lipschitz map
/// (depth-first over points, pruning non-Lipschitz partial maps). Throws
/// TooLarge when |Y|^n > 1e7, BadTarget for the interval.
double obs_diam_exact_small(const FiniteMMSpace& space, const Target& target, double kappa);
double obs_diam_exact_small(const QMMSpace& space, const Target& target, double kappa);

enum class SearchMode { Exact, Heuristic };

/// Label 0 discards a point; labels 1..N name the classes.
struct SeparationWitness {
  std::vector<std::size_t> assignment;
  double delta = 0.0;
  std::vector<double> masses;
  /// Smallest lower distance between points of different classes.
  double min_cross_distance = 1.0;
};

struct SeparationResult {
  double delta = 0.0;
  SeparationWitness witness;
  SearchMode mode = SearchMode::Exact;
};

/// Exact search handles at most this many points.
inline constexpr std::size_t kMaxExactSeparationPoints = 18;

/// Sep(X, kappa_1..kappa_N), N >= 2: the largest delta in {0} union
/// {pairwise lower distances} admitting disjoint classes of mass >= kappa_i
/// pairwise at distance >= delta. Points are indivisible. Throws
/// InfeasibleKappas when no assignment exists even at delta = 0, and
/// ExactBudgetExceeded for exact mode on more than 18 points.
SeparationResult separation(std::span<const double> weights, const Matrix& lower, std::span<const double> kappas,
                            SearchMode mode);
SeparationResult separation(const FiniteMMSpace& space, std::span<const double> kappas, SearchMode mode);
SeparationResult separation(const QMMSpace& space, std::span<const double> kappas, SearchMode mode);

/// Rechecks a witness against raw data: class masses >= kappa_i - tol and
/// cross-class distances >= delta - tol.
bool verify_separation(std::span<const double> weights, const Matrix& lower, std::span<const double> kappas,
                       const SeparationWitness& witness);

}  // namespace mmspace
