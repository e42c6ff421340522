#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmspace/gsystem.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

/// One draw from tau_n(X): symmetric, zero-diagonal, entries in [0,1].
struct SampleMatrix {
  Matrix entries;
  /// Indices of the drawn points, in row order.
  std::vector<std::size_t> points;

  std::size_t n() const noexcept { return entries.size(); }
};

/// Draws n i.i.d. mu-random points (with repetition) and records their
/// distances. In the qmm case all points are drawn first, then each entry
/// (i, j), i < j, row by row, is drawn from d*(x_i, x_j); a seed therefore
/// yields the same points for X and embed_mm(X).
SampleMatrix sample_matrix(const FiniteMMSpace& space, std::size_t n, std::uint64_t seed);
SampleMatrix sample_matrix(const QMMSpace& space, std::size_t n, std::uint64_t seed);

/// Largest n^r accepted by t_exact.
inline constexpr double kMaxExactTuples = 1e8;

/// t(g, X): exact weighted sum over all r-tuples with repetition. Throws
/// TooLarge when n^r exceeds kMaxExactTuples.
double t_exact(const GSystem& g, const FiniteMMSpace& space);
double t_exact(const GSystem& g, const QMMSpace& space);
/// Building blocks for arbitrary weighted kernels (no metric axioms needed).
double t_exact(const GSystem& g, std::span<const double> weights, const Matrix& lengths);
double t_exact(const GSystem& g, std::span<const double> weights, const DistributionMatrix& lengths);

/// Uniform-weight t(g, Y) of a sampled matrix, i.e. the n-point pseudometric
/// space the sample spans.
double t_of_sample(const GSystem& g, const SampleMatrix& sample);

struct Estimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
};

/// Plain Monte Carlo over `samples` independent r-tuples (and, qmm case,
/// independent lengths per pair). standard_error = sample sd / sqrt(samples).
Estimate t_monte_carlo(const GSystem& g, const FiniteMMSpace& space, std::uint64_t samples, std::uint64_t seed);
Estimate t_monte_carlo(const GSystem& g, const QMMSpace& space, std::uint64_t samples, std::uint64_t seed);

/// min(1, 2 exp(-eps^2 n / (2 c_g))). Throws NonPositiveEpsilon, InvalidArgument (n = 0).
double azuma_bound(const GSystem& g, double epsilon, std::uint64_t n);
/// Same formula with an explicit constant in place of c_g.
double azuma_bound(double c_g, double epsilon, std::uint64_t n);
/// min(1, 2 exp(-delta^2 m / 2)). Throws NonPositiveDelta, InvalidArgument (m = 0).
double chernoff_bound(double delta, std::uint64_t m);

enum class MomentMode { Auto, Exact, MonteCarlo };

struct SignatureOptions {
  std::size_t r_max = 2;
  unsigned k_max = 1;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  MomentMode mode = MomentMode::Auto;
  /// In Auto mode an entry is computed exactly when n^r is at most this.
  double exact_limit = 1e6;
};

struct MomentEntry {
  std::size_t order = 0;
  /// Powers for the pairs (1,2), (1,3), ..., in lexicographic order,
  /// canonicalised to the lexicographically smallest relabelling.
  std::vector<unsigned> powers;
  std::string key;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  bool exact = false;
};

/// Finite summary of tau(X) through monomial moments.
class MomentSignature {
 public:
  MomentSignature(SignatureOptions options, std::vector<MomentEntry> entries)
      : options_(options), entries_(std::move(entries)) {}

  const SignatureOptions& options() const noexcept { return options_; }
  const std::vector<MomentEntry>& entries() const noexcept { return entries_; }
  const MomentEntry* find(const std::string& key) const;

 private:
  SignatureOptions options_;
  std::vector<MomentEntry> entries_;
};

/// Orbit representatives of power assignments {0..k_max}^(r choose 2) under
/// relabelling of the r tuple coordinates, sorted lexicographically.
std::vector<std::vector<unsigned>> canonical_power_assignments(std::size_t order, unsigned k_max);

/// Lexicographically smallest relabelling of a power assignment.
std::vector<unsigned> canonical_powers(std::size_t order, const std::vector<unsigned>& powers);

MomentSignature moment_signature(const FiniteMMSpace& space, const SignatureOptions& options);
MomentSignature moment_signature(const QMMSpace& space, const SignatureOptions& options);

}  // namespace mmspace
