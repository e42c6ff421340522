#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmspace/rng.hpp"
#include "mmspace/sampling.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

enum class Family { CompleteGraphs, Spheres, RandomGraphs, UserFiles };

/// "complete_graphs", "spheres", "random_graphs", "user_files".
std::string family_name(Family family);
/// Accepts the names above plus the short forms "complete", "sphere",
/// "random-graph", "files". Throws UnknownFamily.
Family parse_family(const std::string& name);

struct SequenceSpec {
  Family family = Family::CompleteGraphs;
  /// Strictly increasing. Graph size, sphere dimension, or position in `files`.
  std::vector<std::size_t> indices;
  std::uint64_t seed = kDefaultSeed;
  /// Edge probability for random graphs, in (0,1].
  double p = 0.5;
  /// Points per sphere.
  std::size_t sphere_count = 400;
  std::vector<std::string> files;
};

/// Throws InvalidArgument for non-increasing indices or p outside (0,1].
void validate(const SequenceSpec& spec);

/// complete_graphs: X_{K_index}; spheres: sphere_empirical(index, sphere_count,
/// derive_seed(seed, index)); random_graphs: G(index, p) with the same
/// derived seed; user_files: the space stored in files[index].
FiniteMMSpace generate(const SequenceSpec& spec, std::size_t index);

struct ConvergenceOptions {
  std::size_t r_max = 2;
  unsigned k_max = 1;
  std::uint64_t samples = 100000;
  double tol = 0.02;
  std::uint64_t seed = kDefaultSeed;
  MomentMode mode = MomentMode::Auto;
  double exact_limit = 1e6;
};

struct TrajectoryPoint {
  std::size_t index = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  bool exact = false;
};

struct MomentTrajectory {
  std::string key;
  std::vector<TrajectoryPoint> points;
  /// |last - previous| and the allowed gap tol + sqrt(se_last^2 + se_prev^2).
  double last_gap = 0.0;
  double allowance = 0.0;
  bool converged = false;
};

/// Moment trajectories along a sequence. Cauchy behaviour of finitely many
/// moments is a finite proxy for convergence in sampling, not a proof of it.
struct ConvergenceReport {
  std::vector<std::string> labels;
  ConvergenceOptions options;
  std::vector<MomentTrajectory> moments;
  bool converged = false;
};

/// Needs at least three indices (InvalidArgument otherwise).
ConvergenceReport converge_test(const SequenceSpec& spec, const ConvergenceOptions& options);

/// Same test over explicit spaces, labelled 0, 1, 2, ...; needs at least two.
ConvergenceReport converge_test(const std::vector<FiniteMMSpace>& spaces, const ConvergenceOptions& options);

struct MomentGap {
  std::string key;
  double a = 0.0;
  double b = 0.0;
  double gap = 0.0;
  double allowance = 0.0;
  bool within = false;
};

struct LimitComparison {
  bool same_limit = false;
  std::vector<MomentGap> gaps;
  ConvergenceReport a;
  ConvergenceReport b;
};

/// Both sequences must converge on their last two indices (at least two
/// indices each), otherwise NotConverged names the failing sequence ("a" or
/// "b"). The verdict compares the signatures at the last index of each.
LimitComparison compare_limits(const SequenceSpec& a, const SequenceSpec& b, const ConvergenceOptions& options);

}  // namespace mmspace
