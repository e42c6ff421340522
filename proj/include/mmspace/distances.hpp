#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmspace/gsystem.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

/// Step kernel on [0,1]^2: cell (a, b) has mass w_a w_b and carries either a
/// real value in [0,1] or a distribution on [0,1]. Symmetric with zero (or
/// delta_0) diagonal; no triangle inequality is required.
class GridKernel {
 public:
  /// Throws BadWeights, DimensionMismatch, NonSymmetric, NonZeroDiagonal,
  /// DistanceOutOfRange.
  static GridKernel values(std::vector<double> weights, Matrix cells);
  static GridKernel laws(std::vector<double> weights, DistributionMatrix cells);
  static GridKernel of(const FiniteMMSpace& space);
  static GridKernel of(const QMMSpace& space);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  bool has_laws() const noexcept { return laws_; }
  const Matrix& value_cells() const noexcept { return values_; }
  const DistributionMatrix& law_cells() const noexcept { return law_cells_; }

  /// |f - g| or d_ext(f, g) on cell (a, b). Throws GridMismatch.
  double deviation(const GridKernel& other, std::size_t a, std::size_t b) const;

  /// Kernel on new cells: cell c copies the entries of source[c], and gets
  /// weight weights[c].
  GridKernel pulled_back(std::span<const std::size_t> source, std::vector<double> weights) const;

 private:
  GridKernel() = default;

  std::vector<double> weights_;
  bool laws_ = false;
  Matrix values_;
  DistributionMatrix law_cells_;
};

struct Box1Options {
  /// Exact branch-and-bound vertex cover up to this many cells.
  std::size_t max_exact_cells = 30;
  /// Above the limit, return primal-dual bounds instead of throwing
  /// CoverBudgetExceeded.
  bool allow_bounds = true;
};

struct Box1Result {
  /// The certified distance (an achievable eps); equals hi.
  double value = 0.0;
  /// Bracket on the exact value; lo == hi when exact.
  double lo = 0.0;
  double hi = 0.0;
  bool exact = true;
  /// Witness: cells outside `cover` deviate by at most `threshold` <= value,
  /// and the cover weighs at most value.
  std::vector<std::size_t> cover;
  double cover_weight = 0.0;
  double threshold = 0.0;
  /// Mass of the ordered cell pairs deviating by more than value.
  double bad_pair_mass = 0.0;
};

/// Least eps such that some cell set S of weight <= eps has the kernels
/// eps-close on the complement of S squared. Minimises max(tau, C(tau)) over
/// deviation thresholds tau, where C(tau) is the minimum-weight vertex cover
/// of the cells pairs deviating by more than tau. Throws GridMismatch,
/// CoverBudgetExceeded.
Box1Result box1(const GridKernel& f, const GridKernel& g, const Box1Options& options = {});

/// One cell of a common weight refinement: part of point x of the first space
/// and of point y of the second.
struct RefinedCell {
  std::size_t x = 0;
  std::size_t y = 0;
  double weight = 0.0;
};

/// Splits the atoms of both weight vectors (taken in point order) at the union
/// of their cumulative sums. Cells of equal weight within kTolerance share one
/// representative weight.
std::vector<RefinedCell> common_refinement(std::span<const double> wx, std::span<const double> wy);

enum class AlignMode { Exact, Anneal };

struct AlignOptions {
  AlignMode mode = AlignMode::Exact;
  /// Refinements with more cells raise RefinementTooLarge.
  std::size_t cell_cap = 30;
  /// Exact mode enumerates permutations only up to this many cells.
  std::size_t max_exact_cells = 8;
  std::size_t chains = 4;
  std::size_t iterations = 2000;
  std::uint64_t seed = 0;
  Box1Options box1;
};

struct AlignResult {
  /// box1 of the best alignment: an upper bound on the infimum over
  /// measure-preserving reparameterisations.
  double upper_bound = 0.0;
  std::vector<RefinedCell> cells;
  /// Cell c of the first space is matched with the second-space part of
  /// cell permutation[c]; only cells of equal weight are exchanged.
  std::vector<std::size_t> permutation;
  Box1Result box1;
  bool exact = false;
};

/// Upper bound on underline-box1 by aligning cells of the common refinement.
/// Exact mode enumerates all weight-preserving permutations; anneal mode runs
/// independent simulated-annealing chains (seeds derived from options.seed)
/// over transpositions and keeps the best, earliest chain first on ties.
/// Throws RefinementTooLarge, ExactBudgetExceeded, GridMismatch (mm vs qmm).
AlignResult underline_box1(const FiniteMMSpace& x, const FiniteMMSpace& y, const AlignOptions& options = {});
AlignResult underline_box1(const QMMSpace& x, const QMMSpace& y, const AlignOptions& options = {});
AlignResult underline_box1(const GridKernel& x, const GridKernel& y, const AlignOptions& options = {});

/// t(g, kernel).
double t_exact(const GSystem& g, const GridKernel& kernel);

/// Bound on |t(g, f1) - t(g, f2)| for kernels that are eps-close outside a set
/// of pairs of mass `bad_pair_mass`, with every g_ij K-Lipschitz:
///   2 c_g C(r+1,2) bad_pair_mass + K eps sum_p prod_{q != p} ||g_q||,
/// the sum running over off-diagonal indexed pairs p. Throws InvalidArgument
/// for negative inputs or K below the system's Lipschitz constant.
double moment_discrepancy_bound(const GSystem& g, double eps, double lipschitz_k, double bad_pair_mass);
/// Same, with the worst case bad_pair_mass = 1 - (1 - eps)^2 for box1 <= eps.
double moment_discrepancy_bound(const GSystem& g, double eps, double lipschitz_k);
/// Same, instantiated from a box1 witness.
double moment_discrepancy_bound(const GSystem& g, const Box1Result& witness, double lipschitz_k);

/// The literal closed form 2 c_g C(r+1,2) m + (2 K eps max||g||)^C(r+1,2).
/// Not a valid bound in general; kept for comparison.
double printed_moment_discrepancy_bound(const GSystem& g, double eps, double lipschitz_k, double measure_term);

}  // namespace mmspace
