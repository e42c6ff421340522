#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mmspace/distribution.hpp"

namespace mmspace {

/// A test function [0,1] -> R with exact evaluation: either t -> t^k or a
/// piecewise-linear interpolant through breakpoints covering [0,1].
class TestFunction {
 public:
  static TestFunction monomial(unsigned power);
  /// Breakpoints (x, y) with strictly increasing x, first x = 0, last x = 1.
  static TestFunction piecewise_linear(std::vector<std::pair<double, double>> breakpoints);
  static TestFunction constant(double value);

  double operator()(double t) const;
  /// <mu, g>, summed over the atoms of mu.
  double integrate(const DiscreteDistribution& mu) const;

  double sup_norm() const noexcept { return sup_norm_; }
  double lipschitz() const noexcept { return lipschitz_; }

  bool is_monomial() const noexcept { return monomial_; }
  unsigned power() const noexcept { return power_; }
  const std::vector<std::pair<double, double>>& breakpoints() const noexcept { return breakpoints_; }

  /// Stable textual identifier ("t^3", "pl[0:0,1:1]").
  std::string id() const;

 private:
  TestFunction() = default;

  bool monomial_ = true;
  unsigned power_ = 0;
  std::vector<std::pair<double, double>> breakpoints_;
  double sup_norm_ = 1.0;
  double lipschitz_ = 0.0;
};

/// Symmetric family {g_ij}, 1 <= i <= j <= r, of test functions.
///
/// The product defining t(g, X) runs over the pairs i < j by default; with
/// `include_diagonal` the diagonal factors g_ii(0) are included too.
class GSystem {
 public:
  /// `pair_functions` holds g_ij for i <= j in row-major order
  /// (g_11, g_12, ..., g_1r, g_22, ...), r(r+1)/2 entries.
  GSystem(std::size_t order, std::vector<TestFunction> pair_functions, bool include_diagonal = false);

  /// Same function on every pair; the diagonal gets the constant 1 unless
  /// `include_diagonal`, in which case it gets `f` as well.
  static GSystem uniform(std::size_t order, const TestFunction& f, bool include_diagonal = false);

  /// Monomial system with powers for the off-diagonal pairs (1,2), (1,3), ...,
  /// (1,r), (2,3), ... in lexicographic order; diagonal functions are t^0.
  static GSystem monomials(std::size_t order, const std::vector<unsigned>& off_diagonal_powers);

  std::size_t order() const noexcept { return order_; }
  bool include_diagonal() const noexcept { return include_diagonal_; }
  const TestFunction& at(std::size_t i, std::size_t j) const;

  /// The pairs (i, j) entering the product, i < j, plus (i, i) when the
  /// diagonal convention is on.
  std::vector<std::pair<std::size_t, std::size_t>> indexed_pairs() const;
  std::vector<std::pair<std::size_t, std::size_t>> off_diagonal_pairs() const;

  /// Product of sup-norms over the indexed pairs.
  double c_g() const;
  /// Largest Lipschitz constant and largest sup-norm over the indexed pairs.
  double lipschitz() const;
  double max_sup_norm() const;
  /// Product of g_ii(0) over the diagonal (1 without the diagonal convention).
  double diagonal_constant() const;

  std::string id() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const;

  std::size_t order_;
  std::vector<TestFunction> funcs_;
  bool include_diagonal_;
};

}  // namespace mmspace
