#include "mmspace/space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mmspace/error.hpp"

namespace mmspace {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadWeights: return "BadWeights";
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::NonZeroDiagonal: return "NonZeroDiagonal";
    case Errc::DistanceOutOfRange: return "DistanceOutOfRange";
    case Errc::TriangleViolation: return "TriangleViolation";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::ZeroMultiplicity: return "ZeroMultiplicity";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case Errc::NonPositiveDelta: return "NonPositiveDelta";
    case Errc::BadTarget: return "BadTarget";
    case Errc::NotLipschitz: return "NotLipschitz";
    case Errc::InfeasibleKappas: return "InfeasibleKappas";
    case Errc::ExactBudgetExceeded: return "ExactBudgetExceeded";
    case Errc::CliqueSearchBudgetExceeded: return "CliqueSearchBudgetExceeded";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::CoverBudgetExceeded: return "CoverBudgetExceeded";
    case Errc::RefinementTooLarge: return "RefinementTooLarge";
    case Errc::UnknownFamily: return "UnknownFamily";
    case Errc::NotConverged: return "NotConverged";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw Error(Errc::DimensionMismatch, "matrix row " + std::to_string(i) + " has wrong length", {i});
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

void check_weights(std::span<const double> weights) {
  if (weights.empty()) throw Error(Errc::BadWeights, "space has no points");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(Errc::BadWeights, "weight " + std::to_string(i) + " is not positive", {i});
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kTolerance)
    throw Error(Errc::BadWeights, "weights sum to " + std::to_string(total) + ", expected 1");
}

// Returns the lexicographically first (i, j, k) with d(i,k) > d(i,j) + d(j,k),
// or an empty vector. Rows are scanned in parallel; the first row with a
// violation wins, so the report does not depend on thread count.
std::vector<std::size_t> first_triangle_violation(const Matrix& d) {
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  std::vector<std::ptrdiff_t> witness_j(static_cast<std::size_t>(n), -1);
  std::vector<std::ptrdiff_t> witness_k(static_cast<std::size_t>(n), -1);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto di = d.row(static_cast<std::size_t>(i));
    for (std::ptrdiff_t j = 0; j < n && witness_j[i] < 0; ++j) {
      auto dj = d.row(static_cast<std::size_t>(j));
      const double dij = di[static_cast<std::size_t>(j)];
      for (std::ptrdiff_t k = 0; k < n; ++k) {
        if (di[static_cast<std::size_t>(k)] > dij + dj[static_cast<std::size_t>(k)] + kTolerance) {
          witness_j[i] = j;
          witness_k[i] = k;
          break;
        }
      }
    }
  }
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (witness_j[i] >= 0)
      return {static_cast<std::size_t>(i), static_cast<std::size_t>(witness_j[i]),
              static_cast<std::size_t>(witness_k[i])};
  return {};
}

// Shape checks shared by spaces and targets; returns whether two distinct
// points sit at distance zero.
bool check_metric_shape(const Matrix& d) {
  const std::size_t n = d.size();
  bool pseudo = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kTolerance)
        throw Error(Errc::DistanceOutOfRange,
                    "distance (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]", {i, j});
      if (i == j && v != 0.0)
        throw Error(Errc::NonZeroDiagonal, "diagonal entry " + std::to_string(i) + " is not zero", {i});
      if (i != j && v == 0.0) pseudo = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(d(i, j) - d(j, i)) > kTolerance)
        throw Error(Errc::NonSymmetric,
                    "distance (" + std::to_string(i) + "," + std::to_string(j) + ") is not symmetric", {i, j});
  if (auto v = first_triangle_violation(d); !v.empty())
    throw Error(Errc::TriangleViolation,
                "triangle inequality fails at (" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," +
                    std::to_string(v[2]) + ")",
                v);
  return pseudo;
}

}  // namespace

FiniteMMSpace FiniteMMSpace::create(std::vector<double> weights, Matrix dist) {
  if (weights.size() != dist.size())
    throw Error(Errc::DimensionMismatch, "weights and distance matrix disagree on the point count");
  check_weights(weights);
  const bool pseudo = check_metric_shape(dist);
  return FiniteMMSpace(std::move(weights), std::move(dist), pseudo);
}

QMMSpace QMMSpace::create(std::vector<double> weights, DistributionMatrix dstar) {
  if (weights.size() != dstar.size())
    throw Error(Errc::DimensionMismatch, "weights and d* matrix disagree on the point count");
  check_weights(weights);
  const DiscreteDistribution zero;
  for (std::size_t i = 0; i < dstar.size(); ++i) {
    if (!(dstar(i, i) == zero))
      throw Error(Errc::NonZeroDiagonal, "d*(x,x) must be the point mass at 0", {i});
    for (std::size_t j = i + 1; j < dstar.size(); ++j)
      if (!(dstar(i, j) == dstar(j, i)))
        throw Error(Errc::NonSymmetric, "d* is not symmetric", {i, j});
  }
  return QMMSpace(std::move(weights), std::move(dstar));
}

Target Target::finite(Matrix dist) {
  if (dist.size() == 0) throw Error(Errc::BadTarget, "finite target needs at least one point");
  try {
    check_metric_shape(dist);
  } catch (const Error& e) {
    throw Error(Errc::BadTarget, std::string("target is not a metric of diameter <= 1: ") + e.what(),
                e.indices());
  }
  Target t;
  t.interval_ = false;
  t.dist_ = std::move(dist);
  return t;
}

double Target::diameter() const {
  if (interval_) return 1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < dist_.size(); ++i)
    for (double v : dist_.row(i)) d = std::max(d, v);
  return d;
}

PushforwardMeasure PushforwardMeasure::on_interval(DiscreteDistribution measure) {
  return PushforwardMeasure(Target::interval(), std::move(measure), {});
}

PushforwardMeasure PushforwardMeasure::on_finite(Target carrier, std::vector<double> weights) {
  if (carrier.is_interval() || weights.size() != carrier.size())
    throw Error(Errc::DimensionMismatch, "weights must cover every target point");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(Errc::BadWeights, "negative pushforward weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kTolerance) throw Error(Errc::BadWeights, "pushforward mass is not 1");
  return PushforwardMeasure(std::move(carrier), DiscreteDistribution(), std::move(weights));
}

FiniteMMSpace from_graph(const std::vector<std::vector<bool>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "graph has no vertices");
  Matrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) throw Error(Errc::DimensionMismatch, "adjacency matrix is not square", {i});
    if (adjacency[i][i]) throw Error(Errc::SelfLoop, "self-loop at vertex " + std::to_string(i), {i});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency[i][j] != adjacency[j][i])
        throw Error(Errc::NonSymmetric, "adjacency is not symmetric", {std::min(i, j), std::max(i, j)});
      if (i != j) d(i, j) = adjacency[i][j] ? 0.5 : 1.0;
    }
  // Distances in {1/2, 1} always satisfy the triangle inequality.
  return FiniteMMSpace::create(std::vector<double>(n, 1.0 / static_cast<double>(n)), std::move(d));
}

FiniteMMSpace from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw Error(Errc::InvalidArgument, "edge endpoint out of range", {a, b});
    if (a == b) throw Error(Errc::SelfLoop, "self-loop at vertex " + std::to_string(a), {a});
    adj[a][b] = adj[b][a] = true;
  }
  return from_graph(adj);
}

FiniteMMSpace sphere_from_directions(const std::vector<std::vector<double>>& directions) {
  const std::size_t n = directions.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "no directions");
  const std::size_t ambient = directions.front().size();
  std::vector<std::vector<double>> unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (directions[i].size() != ambient) throw Error(Errc::DimensionMismatch, "ragged direction list", {i});
    double norm = 0.0;
    for (double x : directions[i]) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw Error(Errc::InvalidArgument, "zero direction vector", {i});
    unit[i] = directions[i];
    for (double& x : unit[i]) x /= norm;
  }
  Matrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double diff = 0.0, sum = 0.0;
      for (std::size_t c = 0; c < ambient; ++c) {
        const double a = unit[i][c], b = unit[j][c];
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
      }
      // 2 atan2(|u-v|, |u+v|) is the angle between unit vectors, and stays
      // accurate near 0 and pi where acos(u.v) does not.
      const double angle = 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
      d(i, j) = d(j, i) = std::clamp(angle / std::numbers::pi, 0.0, 1.0);
    }
  }
  return FiniteMMSpace::create(std::vector<double>(n, 1.0 / static_cast<double>(n)), std::move(d));
}

FiniteMMSpace sphere_empirical(std::size_t dim, std::size_t count, std::uint64_t seed) {
  if (dim < 1) throw Error(Errc::InvalidArgument, "sphere dimension must be >= 1");
  if (count < 2) throw Error(Errc::InvalidArgument, "sphere sample needs at least 2 points");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim + 1));
  for (auto& p : pts) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : p) {
        x = gauss(rng);
        norm += x * x;
      }
    } while (norm == 0.0);
  }
  return sphere_from_directions(pts);
}

std::vector<std::size_t> blow_up_origin(std::span<const std::size_t> multiplicities) {
  std::vector<std::size_t> origin;
  for (std::size_t i = 0; i < multiplicities.size(); ++i)
    for (std::size_t c = 0; c < multiplicities[i]; ++c) origin.push_back(i);
  return origin;
}

FiniteMMSpace blow_up(const FiniteMMSpace& space, std::span<const std::size_t> multiplicities) {
  if (multiplicities.size() != space.size())
    throw Error(Errc::DimensionMismatch, "one multiplicity per point is required");
  for (std::size_t i = 0; i < multiplicities.size(); ++i)
    if (multiplicities[i] == 0) throw Error(Errc::ZeroMultiplicity, "multiplicity must be positive", {i});
  const auto origin = blow_up_origin(multiplicities);
  const std::size_t m = origin.size();
  std::vector<double> w(m);
  Matrix d(m);
  for (std::size_t a = 0; a < m; ++a) {
    w[a] = space.weight(origin[a]) / static_cast<double>(multiplicities[origin[a]]);
    for (std::size_t b = 0; b < m; ++b) d(a, b) = space.distance(origin[a], origin[b]);
  }
  const bool pseudo = space.is_pseudometric() || m > space.size();
  return FiniteMMSpace(std::move(w), std::move(d), pseudo);
}

FiniteMMSpace permuted(const FiniteMMSpace& space, std::span<const std::size_t> perm) {
  const std::size_t n = space.size();
  if (perm.size() != n) throw Error(Errc::DimensionMismatch, "permutation size mismatch");
  std::vector<double> w(n);
  Matrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = space.weight(perm[i]);
    for (std::size_t j = 0; j < n; ++j) d(i, j) = space.distance(perm[i], perm[j]);
  }
  return FiniteMMSpace(std::move(w), std::move(d), space.is_pseudometric());
}

QMMSpace permuted(const QMMSpace& space, std::span<const std::size_t> perm) {
  const std::size_t n = space.size();
  if (perm.size() != n) throw Error(Errc::DimensionMismatch, "permutation size mismatch");
  std::vector<double> w(n);
  DistributionMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = space.weight(perm[i]);
    for (std::size_t j = 0; j < n; ++j) d(i, j) = space.at(perm[i], perm[j]);
  }
  return QMMSpace(std::move(w), std::move(d));
}

QMMSpace embed_mm(const FiniteMMSpace& space) {
  const std::size_t n = space.size();
  DistributionMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) d(i, j) = DiscreteDistribution::point_mass(space.distance(i, j));
  std::vector<double> w(space.weights().begin(), space.weights().end());
  return QMMSpace::create(std::move(w), std::move(d));
}

Matrix lower_matrix(const QMMSpace& q) {
  Matrix m(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (i != j) m(i, j) = q.at(i, j).min_value();
  return m;
}

Matrix upper_matrix(const QMMSpace& q) {
  Matrix m(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (i != j) m(i, j) = q.at(i, j).max_value();
  return m;
}

namespace {

double triangle_failure_probability(const DiscreteDistribution& ab, const DiscreteDistribution& bc,
                                    const DiscreteDistribution& ac) {
  double fail = 0.0;
  for (const Atom& x : ab.atoms())
    for (const Atom& y : bc.atoms())
      for (const Atom& z : ac.atoms()) {
        const bool ok = x.value <= y.value + z.value + kTolerance && y.value <= x.value + z.value + kTolerance &&
                        z.value <= x.value + y.value + kTolerance;
        if (!ok) fail += x.weight * y.weight * z.weight;
      }
  return fail;
}

}  // namespace

double validate_qmm(const QMMSpace& q) {
  const auto n = static_cast<std::ptrdiff_t>(q.size());
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    double acc = 0.0;
    for (std::size_t b = ua + 1; b < q.size(); ++b)
      for (std::size_t c = b + 1; c < q.size(); ++c) {
        const double p = triangle_failure_probability(q.at(ua, b), q.at(b, c), q.at(ua, c));
        if (p > 0.0) acc += q.weight(ua) * q.weight(b) * q.weight(c) * p;
      }
    partial[ua] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  // Each unordered triple appears as 6 ordered triples of distinct points.
  return std::clamp(6.0 * total, 0.0, 1.0);
}

}  // namespace mmspace
