#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mmspace/distribution.hpp"
#include "mmspace/matrix.hpp"

namespace mmspace {

class FiniteMMSpace;
class QMMSpace;
FiniteMMSpace blow_up(const FiniteMMSpace& space, std::span<const std::size_t> multiplicities);
FiniteMMSpace permuted(const FiniteMMSpace& space, std::span<const std::size_t> perm);
QMMSpace permuted(const QMMSpace& space, std::span<const std::size_t> perm);

/// Finite metric measure space: n weighted points, distances in [0,1].
///
/// Weights are strictly positive and sum to one; the distance matrix is
/// symmetric with zero diagonal and satisfies the triangle inequality within
/// kTolerance. Distinct points at distance zero are allowed and make the space
/// a pseudometric space (`is_pseudometric()`); blow-ups always produce these.
class FiniteMMSpace {
 public:
  /// Validates and builds. Throws Error with BadWeights, DimensionMismatch,
  /// DistanceOutOfRange, NonZeroDiagonal, NonSymmetric or TriangleViolation;
  /// the error indices name the first offending pair or triple (i, j, k) with
  /// d(i,k) > d(i,j) + d(j,k).
  static FiniteMMSpace create(std::vector<double> weights, Matrix dist);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const Matrix& dist() const noexcept { return dist_; }
  double distance(std::size_t i, std::size_t j) const { return dist_(i, j); }
  bool is_pseudometric() const noexcept { return pseudometric_; }

 private:
  friend FiniteMMSpace blow_up(const FiniteMMSpace&, std::span<const std::size_t>);
  friend FiniteMMSpace permuted(const FiniteMMSpace&, std::span<const std::size_t>);

  FiniteMMSpace(std::vector<double> weights, Matrix dist, bool pseudometric)
      : weights_(std::move(weights)), dist_(std::move(dist)), pseudometric_(pseudometric) {}

  std::vector<double> weights_;
  Matrix dist_;
  bool pseudometric_ = false;
};

using DistributionMatrix = SquareMatrix<DiscreteDistribution>;

/// Quantum metric measure space: every pairwise "distance" is a finitely
/// supported law on [0,1]. Construction checks the structural invariants
/// (symmetry, d*(x,x) = delta_0, weights); the almost-sure triangle
/// inequality is measured separately by validate_qmm.
class QMMSpace {
 public:
  static QMMSpace create(std::vector<double> weights, DistributionMatrix dstar);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const DistributionMatrix& dstar() const noexcept { return dstar_; }
  const DiscreteDistribution& at(std::size_t i, std::size_t j) const { return dstar_(i, j); }

 private:
  friend QMMSpace permuted(const QMMSpace&, std::span<const std::size_t>);

  QMMSpace(std::vector<double> weights, DistributionMatrix dstar)
      : weights_(std::move(weights)), dstar_(std::move(dstar)) {}

  std::vector<double> weights_;
  DistributionMatrix dstar_;
};

/// Target space Y for Lipschitz maps: either the unit interval or a finite
/// metric space of diameter at most one.
class Target {
 public:
  static Target interval() { return Target(); }
  /// Throws BadTarget when the matrix is not a metric of diameter <= 1.
  static Target finite(Matrix dist);

  bool is_interval() const noexcept { return interval_; }
  /// Number of points of a finite target (0 for the interval).
  std::size_t size() const noexcept { return dist_.size(); }
  const Matrix& dist() const noexcept { return dist_; }
  double diameter() const;

 private:
  Target() = default;
  bool interval_ = true;
  Matrix dist_;
};

/// Image measure f_*(mu) of a map into a Target.
class PushforwardMeasure {
 public:
  static PushforwardMeasure on_interval(DiscreteDistribution measure);
  /// Weights over Y's points; zeros allowed, total mass 1 within kTolerance.
  static PushforwardMeasure on_finite(Target carrier, std::vector<double> weights);

  const Target& carrier() const noexcept { return carrier_; }
  bool is_interval() const noexcept { return carrier_.is_interval(); }
  const DiscreteDistribution& interval_measure() const noexcept { return interval_measure_; }
  std::span<const double> point_weights() const noexcept { return point_weights_; }

 private:
  PushforwardMeasure(Target carrier, DiscreteDistribution m, std::vector<double> w)
      : carrier_(std::move(carrier)), interval_measure_(std::move(m)), point_weights_(std::move(w)) {}

  Target carrier_;
  DiscreteDistribution interval_measure_;
  std::vector<double> point_weights_;
};

/// Graph space X_G: uniform weights, distance 1/2 on edges and 1 otherwise.
/// Throws SelfLoop or NonSymmetric.
FiniteMMSpace from_graph(const std::vector<std::vector<bool>>& adjacency);
FiniteMMSpace from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

/// `count` i.i.d. uniform points on the unit sphere S^dim in R^(dim+1), with
/// geodesic angle / pi as distance and uniform weights.
FiniteMMSpace sphere_empirical(std::size_t dim, std::size_t count, std::uint64_t seed);
/// Same distance construction for explicitly given (not necessarily unit)
/// nonzero direction vectors.
FiniteMMSpace sphere_from_directions(const std::vector<std::vector<double>>& directions);

/// Replaces point i by multiplicities[i] zero-distance copies of weight
/// w_i / multiplicities[i]. Throws ZeroMultiplicity.
FiniteMMSpace blow_up(const FiniteMMSpace& space, std::span<const std::size_t> multiplicities);

/// Point index of each blow-up copy, in output order.
std::vector<std::size_t> blow_up_origin(std::span<const std::size_t> multiplicities);

/// Relabels points: output point i is input point perm[i].
FiniteMMSpace permuted(const FiniteMMSpace& space, std::span<const std::size_t> perm);
QMMSpace permuted(const QMMSpace& space, std::span<const std::size_t> perm);

QMMSpace embed_mm(const FiniteMMSpace& space);

/// Entrywise infimum / supremum of the support of d*(i,j).
Matrix lower_matrix(const QMMSpace& q);
Matrix upper_matrix(const QMMSpace& q);

/// Exact probability, over mu^3-random ordered triples of distinct points and
/// independent length draws, that some triangle inequality fails. Triples
/// with a repeated point count as non-failing.
double validate_qmm(const QMMSpace& q);

}  // namespace mmspace
