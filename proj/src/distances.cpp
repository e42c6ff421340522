#include "mmspace/distances.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <random>
#include <string>

#include "mmspace/error.hpp"
#include "mmspace/rng.hpp"
#include "mmspace/sampling.hpp"

namespace mmspace {

namespace {

void check_grid_weights(std::span<const double> weights) {
  if (weights.empty()) throw Error(Errc::BadWeights, "kernel has no cells");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(Errc::BadWeights, "cell weight " + std::to_string(i) + " is not positive", {i});
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kTolerance) throw Error(Errc::BadWeights, "cell weights do not sum to 1");
}

double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

}  // namespace

GridKernel GridKernel::values(std::vector<double> weights, Matrix cells) {
  if (weights.size() != cells.size()) throw Error(Errc::DimensionMismatch, "weights and cells disagree");
  check_grid_weights(weights);
  for (std::size_t a = 0; a < cells.size(); ++a) {
    if (cells(a, a) != 0.0) throw Error(Errc::NonZeroDiagonal, "kernel diagonal must be 0", {a});
    for (std::size_t b = 0; b < cells.size(); ++b) {
      const double v = cells(a, b);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kTolerance)
        throw Error(Errc::DistanceOutOfRange, "kernel value outside [0,1]", {a, b});
      if (cells(b, a) != v) throw Error(Errc::NonSymmetric, "kernel is not symmetric", {a, b});
    }
  }
  GridKernel k;
  k.weights_ = std::move(weights);
  k.values_ = std::move(cells);
  return k;
}

GridKernel GridKernel::laws(std::vector<double> weights, DistributionMatrix cells) {
  if (weights.size() != cells.size()) throw Error(Errc::DimensionMismatch, "weights and cells disagree");
  check_grid_weights(weights);
  const DiscreteDistribution zero;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    if (!(cells(a, a) == zero)) throw Error(Errc::NonZeroDiagonal, "kernel diagonal must be delta_0", {a});
    for (std::size_t b = a + 1; b < cells.size(); ++b)
      if (!(cells(a, b) == cells(b, a))) throw Error(Errc::NonSymmetric, "kernel is not symmetric", {a, b});
  }
  GridKernel k;
  k.weights_ = std::move(weights);
  k.laws_ = true;
  k.law_cells_ = std::move(cells);
  return k;
}

GridKernel GridKernel::of(const FiniteMMSpace& space) {
  GridKernel k;
  k.weights_.assign(space.weights().begin(), space.weights().end());
  k.values_ = space.dist();
  return k;
}

GridKernel GridKernel::of(const QMMSpace& space) {
  GridKernel k;
  k.weights_.assign(space.weights().begin(), space.weights().end());
  k.laws_ = true;
  k.law_cells_ = space.dstar();
  return k;
}

double GridKernel::deviation(const GridKernel& other, std::size_t a, std::size_t b) const {
  if (laws_ != other.laws_) throw Error(Errc::GridMismatch, "cannot compare value and law kernels");
  if (laws_) return d_ext(law_cells_(a, b), other.law_cells_(a, b));
  return std::abs(values_(a, b) - other.values_(a, b));
}

GridKernel GridKernel::pulled_back(std::span<const std::size_t> source, std::vector<double> weights) const {
  const std::size_t n = source.size();
  if (weights.size() != n) throw Error(Errc::DimensionMismatch, "one weight per new cell is required");
  GridKernel k;
  k.weights_ = std::move(weights);
  k.laws_ = laws_;
  if (laws_) {
    k.law_cells_ = DistributionMatrix(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) k.law_cells_(a, b) = law_cells_(source[a], source[b]);
  } else {
    k.values_ = Matrix(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) k.values_(a, b) = values_(source[a], source[b]);
  }
  return k;
}

// ---------------------------------------------------------------------------
// box1

namespace {

double mask_weight(std::uint64_t mask, std::span<const double> w) {
  std::vector<double> terms;
  while (mask) {
    terms.push_back(w[static_cast<std::size_t>(std::countr_zero(mask))]);
    mask &= mask - 1;
  }
  return sorted_sum(std::move(terms));
}

// Exact minimum-weight vertex cover on at most 64 vertices. Branches on a
// maximum-degree vertex (take it, or take all its neighbours) and prunes with
// the local-ratio lower bound.
class CoverSearch {
 public:
  CoverSearch(const std::vector<std::uint64_t>& adjacency, std::span<const double> weights)
      : adj_(adjacency), w_(weights) {}

  std::uint64_t solve(std::uint64_t forced) {
    const std::size_t n = w_.size();
    const std::uint64_t all = n == 64 ? ~0ULL : ((1ULL << n) - 1);
    const std::uint64_t free = all & ~forced;
    best_mask_ = forced | ratio_cover(free);
    best_ = mask_weight(best_mask_, w_);
    search(forced, free, mask_weight(forced, w_));
    return best_mask_;
  }

 private:
  // Local-ratio pass over the edges inside `free`: returns the paid amount (a
  // lower bound on the cover weight) and the cover of fully paid vertices.
  std::pair<double, std::uint64_t> local_ratio(std::uint64_t free) const {
    std::vector<double> residual(w_.begin(), w_.end());
    double paid = 0.0;
    std::uint64_t cover = 0;
    for (std::uint64_t a_set = free; a_set; a_set &= a_set - 1) {
      const auto a = static_cast<std::size_t>(std::countr_zero(a_set));
      std::uint64_t nb = adj_[a] & free & ~((2ULL << a) - 1);
      for (; nb; nb &= nb - 1) {
        const auto b = static_cast<std::size_t>(std::countr_zero(nb));
        const double d = std::min(residual[a], residual[b]);
        residual[a] -= d;
        residual[b] -= d;
        paid += d;
        if (residual[a] <= 0.0) cover |= 1ULL << a;
        if (residual[b] <= 0.0) cover |= 1ULL << b;
      }
    }
    return {paid, cover};
  }

  std::uint64_t ratio_cover(std::uint64_t free) const { return local_ratio(free).second; }

  void search(std::uint64_t chosen, std::uint64_t free, double cost) {
    std::size_t v = 64;
    int degree = 0;
    for (std::uint64_t s = free; s; s &= s - 1) {
      const auto a = static_cast<std::size_t>(std::countr_zero(s));
      const int d = std::popcount(adj_[a] & free);
      if (d > degree) degree = d, v = a;
    }
    if (degree == 0) {
      const double exact = mask_weight(chosen, w_);
      if (exact < best_) best_ = exact, best_mask_ = chosen;
      return;
    }
    if (cost + local_ratio(free).first >= best_) return;
    const std::uint64_t bit = 1ULL << v;
    search(chosen | bit, free & ~bit, cost + w_[v]);
    const std::uint64_t nb = adj_[v] & free;
    double add = 0.0;
    for (std::uint64_t s = nb; s; s &= s - 1) add += w_[static_cast<std::size_t>(std::countr_zero(s))];
    search(chosen | nb, free & ~nb & ~bit, cost + add);
  }

  const std::vector<std::uint64_t>& adj_;
  std::span<const double> w_;
  std::uint64_t best_mask_ = 0;
  double best_ = 0.0;
};

struct CoverAt {
  double weight = 0.0;
  std::vector<std::size_t> cells;
};

CoverAt exact_cover(const Matrix& dev, std::span<const double> w, double tau) {
  const std::size_t n = w.size();
  std::vector<std::uint64_t> adj(n, 0);
  std::uint64_t forced = 0;
  for (std::size_t a = 0; a < n; ++a) {
    if (dev(a, a) > tau) forced |= 1ULL << a;
    for (std::size_t b = a + 1; b < n; ++b)
      if (dev(a, b) > tau) adj[a] |= 1ULL << b, adj[b] |= 1ULL << a;
  }
  CoverSearch search(adj, w);
  const std::uint64_t mask = search.solve(forced);
  CoverAt c;
  c.weight = mask_weight(mask, w);
  for (std::size_t a = 0; a < n; ++a)
    if (mask >> a & 1ULL) c.cells.push_back(a);
  return c;
}

// Primal-dual pass for large grids: returns (dual lower bound, cover).
std::pair<double, CoverAt> ratio_cover(const Matrix& dev, std::span<const double> w, double tau) {
  const std::size_t n = w.size();
  std::vector<double> residual(w.begin(), w.end());
  std::vector<bool> in(n, false);
  double paid = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (dev(a, a) > tau) {
      paid += residual[a];
      residual[a] = 0.0;
      in[a] = true;
    }
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!(dev(a, b) > tau)) continue;
      const double d = std::min(residual[a], residual[b]);
      residual[a] -= d;
      residual[b] -= d;
      paid += d;
      if (residual[a] <= 0.0) in[a] = true;
      if (residual[b] <= 0.0) in[b] = true;
    }
  }
  CoverAt c;
  std::vector<double> terms;
  for (std::size_t a = 0; a < n; ++a)
    if (in[a]) c.cells.push_back(a), terms.push_back(w[a]);
  c.weight = sorted_sum(std::move(terms));
  return {paid, std::move(c)};
}

void check_same_grid(const GridKernel& f, const GridKernel& g) {
  if (f.size() != g.size()) throw Error(Errc::GridMismatch, "kernels have different grid sizes");
  if (f.has_laws() != g.has_laws()) throw Error(Errc::GridMismatch, "cannot compare value and law kernels");
  for (std::size_t a = 0; a < f.size(); ++a)
    if (std::abs(f.weights()[a] - g.weights()[a]) > kTolerance)
      throw Error(Errc::GridMismatch, "kernels have different cell weights", {a});
}

}  // namespace

Box1Result box1(const GridKernel& f, const GridKernel& g, const Box1Options& options) {
  check_same_grid(f, g);
  const std::size_t n = f.size();
  const auto w = f.weights();
  Matrix dev(n);
  std::vector<double> candidates{0.0};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      dev(a, b) = dev(b, a) = f.deviation(g, a, b);
      candidates.push_back(dev(a, b));
    }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  const std::size_t m = candidates.size();

  Box1Result r;
  CoverAt witness;
  if (n <= std::min<std::size_t>(options.max_exact_cells, 64)) {
    std::vector<std::optional<CoverAt>> cache(m);
    auto cover = [&](std::size_t k) -> const CoverAt& {
      if (!cache[k]) cache[k] = exact_cover(dev, w, candidates[k]);
      return *cache[k];
    };
    // First threshold whose cover is no heavier than the threshold itself.
    std::size_t lo = 0, hi = m - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cover(mid).weight <= candidates[mid])
        hi = mid;
      else
        lo = mid + 1;
    }
    std::size_t k = lo;
    if (k > 0 && cover(k - 1).weight < candidates[k]) k = k - 1;
    witness = cover(k);
    r.threshold = candidates[k];
    r.value = std::max(candidates[k], witness.weight);
    r.lo = r.hi = r.value;
    r.exact = true;
  } else {
    if (!options.allow_bounds)
      throw Error(Errc::CoverBudgetExceeded, "exact vertex cover is limited to " +
                                                 std::to_string(options.max_exact_cells) + " cells", {n});
    std::vector<double> dual(m);
    std::vector<CoverAt> primal(m);
    for (std::size_t k = 0; k < m; ++k) std::tie(dual[k], primal[k]) = ratio_cover(dev, w, candidates[k]);
    // The optimum is non-increasing in the threshold: later duals bound it
    // from below, earlier covers stay valid.
    r.lo = std::numeric_limits<double>::infinity();
    double lower = 0.0;
    for (std::size_t k = m; k-- > 0;) {
      lower = std::max(lower, dual[k]);
      r.lo = std::min(r.lo, std::max(candidates[k], lower));
    }
    r.hi = std::numeric_limits<double>::infinity();
    std::size_t best_cover = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (primal[k].weight < primal[best_cover].weight) best_cover = k;
      const double v = std::max(candidates[k], primal[best_cover].weight);
      if (v < r.hi) {
        r.hi = v;
        r.threshold = candidates[k];
        witness = primal[best_cover];
      }
    }
    r.value = r.hi;
    r.exact = r.lo == r.hi;
  }
  r.cover = std::move(witness.cells);
  r.cover_weight = witness.weight;
  std::vector<double> bad;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (dev(a, b) > r.value) bad.push_back(w[a] * w[b]);
  r.bad_pair_mass = sorted_sum(std::move(bad));
  return r;
}

// ---------------------------------------------------------------------------
// Alignment

std::vector<RefinedCell> common_refinement(std::span<const double> wx, std::span<const double> wy) {
  std::vector<RefinedCell> cells;
  std::size_t i = 0, j = 0;
  double rx = wx.empty() ? 0.0 : wx[0];
  double ry = wy.empty() ? 0.0 : wy[0];
  while (i < wx.size() && j < wy.size()) {
    const double c = std::min(rx, ry);
    if (c > kTolerance) cells.push_back({i, j, c});
    rx -= c;
    ry -= c;
    if (rx <= kTolerance && ++i < wx.size()) rx = wx[i];
    if (ry <= kTolerance && ++j < wy.size()) ry = wy[j];
  }
  // One representative weight per class of (nearly) equal weights, so that
  // exchanging cells of a class leaves the weight vector bitwise unchanged.
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cells[a].weight < cells[b].weight; });
  double rep = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    double& wk = cells[order[k]].weight;
    if (k == 0 || wk - rep > kTolerance) rep = wk;
    wk = rep;
  }
  return cells;
}

namespace {

class Aligner {
 public:
  Aligner(const GridKernel& x, const GridKernel& y, const AlignOptions& options) : y_(y), options_(options) {
    if (x.has_laws() != y.has_laws()) throw Error(Errc::GridMismatch, "cannot align value and law kernels");
    cells_ = common_refinement(x.weights(), y.weights());
    if (cells_.size() > options.cell_cap)
      throw Error(Errc::RefinementTooLarge,
                  "common refinement has " + std::to_string(cells_.size()) + " cells (cap " +
                      std::to_string(options.cell_cap) + "); quantize the weights",
                  {cells_.size()});
    std::vector<std::size_t> sx;
    for (const auto& c : cells_) weights_.push_back(c.weight), sx.push_back(c.x);
    // Weights may drift by rounding; renormalise onto the shared vector.
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::GridMismatch, "refinement lost mass");
    fx_.emplace(x.pulled_back(sx, weights_));
    std::vector<std::size_t> order(cells_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights_[a] < weights_[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k == 0 || weights_[order[k]] != weights_[order[k - 1]]) groups_.emplace_back();
      groups_.back().push_back(order[k]);
    }
    for (auto& g : groups_) std::sort(g.begin(), g.end());
  }

  const std::vector<RefinedCell>& cells() const { return cells_; }

  Box1Result evaluate(const std::vector<std::size_t>& perm) const {
    std::vector<std::size_t> sy(perm.size());
    for (std::size_t c = 0; c < perm.size(); ++c) sy[c] = cells_[perm[c]].y;
    return box1(*fx_, y_.pulled_back(sy, weights_), options_.box1);
  }

  std::pair<std::vector<std::size_t>, Box1Result> exact() const {
    std::vector<std::size_t> perm(cells_.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    Box1Result best_value = evaluate(perm);
    enumerate(0, perm, best, best_value);
    return {best, best_value};
  }

  std::pair<std::vector<std::size_t>, Box1Result> anneal() const {
    const std::size_t chains = std::max<std::size_t>(1, options_.chains);
    std::vector<std::vector<std::size_t>> perms(chains);
    std::vector<Box1Result> values(chains);
    const auto count = static_cast<std::ptrdiff_t>(chains);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
      std::tie(perms[c], values[c]) = chain(static_cast<std::size_t>(c));
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < chains; ++c)
      if (values[c].value < values[best].value) best = c;
    return {perms[best], values[best]};
  }

 private:
  void enumerate(std::size_t group, std::vector<std::size_t>& perm, std::vector<std::size_t>& best,
                 Box1Result& best_value) const {
    if (group == groups_.size()) {
      auto v = evaluate(perm);
      if (v.value < best_value.value) best_value = std::move(v), best = perm;
      return;
    }
    const auto& members = groups_[group];
    std::vector<std::size_t> images = members;
    do {
      for (std::size_t k = 0; k < members.size(); ++k) perm[members[k]] = images[k];
      enumerate(group + 1, perm, best, best_value);
    } while (std::next_permutation(images.begin(), images.end()));
    for (std::size_t k = 0; k < members.size(); ++k) perm[members[k]] = members[k];
  }

  std::pair<std::vector<std::size_t>, Box1Result> chain(std::size_t index) const {
    Rng rng(derive_seed(options_.seed, index));
    std::vector<std::size_t> perm(cells_.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<const std::vector<std::size_t>*> movable;
    for (const auto& g : groups_)
      if (g.size() > 1) movable.push_back(&g);
    if (index > 0) {
      for (const auto* g : movable) {
        std::vector<std::size_t> images = *g;
        std::shuffle(images.begin(), images.end(), rng);
        for (std::size_t k = 0; k < g->size(); ++k) perm[(*g)[k]] = images[k];
      }
    }
    Box1Result current = evaluate(perm);
    std::vector<std::size_t> best = perm;
    Box1Result best_value = current;
    if (movable.empty()) return {best, best_value};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t iterations = options_.iterations;
    for (std::size_t it = 0; it < iterations; ++it) {
      const auto& g = *movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(rng)];
      std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
      const std::size_t a = g[pick(rng)];
      std::size_t b = g[pick(rng)];
      if (a == b) continue;
      std::swap(perm[a], perm[b]);
      auto v = evaluate(perm);
      const double temperature = 0.05 * (1.0 - static_cast<double>(it) / static_cast<double>(iterations)) + 1e-4;
      const double delta = v.value - current.value;
      if (delta <= 0.0 || unit(rng) < std::exp(-delta / temperature)) {
        current = v;
        if (v.value < best_value.value) best_value = std::move(v), best = perm;
      } else {
        std::swap(perm[a], perm[b]);
      }
    }
    return {best, best_value};
  }

  const GridKernel& y_;
  const AlignOptions& options_;
  std::vector<RefinedCell> cells_;
  std::vector<double> weights_;
  std::optional<GridKernel> fx_;
  std::vector<std::vector<std::size_t>> groups_;
};

}  // namespace

AlignResult underline_box1(const GridKernel& x, const GridKernel& y, const AlignOptions& options) {
  Aligner aligner(x, y, options);
  if (options.mode == AlignMode::Exact && aligner.cells().size() > options.max_exact_cells)
    throw Error(Errc::ExactBudgetExceeded,
                "exact alignment is limited to " + std::to_string(options.max_exact_cells) + " refined cells",
                {aligner.cells().size()});
  auto [perm, value] = options.mode == AlignMode::Exact ? aligner.exact() : aligner.anneal();
  AlignResult r;
  r.upper_bound = value.value;
  r.cells = aligner.cells();
  r.permutation = std::move(perm);
  r.box1 = std::move(value);
  r.exact = options.mode == AlignMode::Exact && r.box1.exact;
  return r;
}

AlignResult underline_box1(const FiniteMMSpace& x, const FiniteMMSpace& y, const AlignOptions& options) {
  return underline_box1(GridKernel::of(x), GridKernel::of(y), options);
}

AlignResult underline_box1(const QMMSpace& x, const QMMSpace& y, const AlignOptions& options) {
  return underline_box1(GridKernel::of(x), GridKernel::of(y), options);
}

double t_exact(const GSystem& g, const GridKernel& kernel) {
  if (kernel.has_laws()) return t_exact(g, kernel.weights(), kernel.law_cells());
  return t_exact(g, kernel.weights(), kernel.value_cells());
}

// ---------------------------------------------------------------------------
// Moment continuity

namespace {

double pair_count_bound(const GSystem& g) {
  const auto r = static_cast<double>(g.order());
  return r * (r + 1.0) / 2.0;
}

void check_bound_inputs(const GSystem& g, double eps, double k) {
  if (!(eps >= 0.0)) throw Error(Errc::InvalidArgument, "eps must be non-negative");
  if (!(k >= 0.0)) throw Error(Errc::InvalidArgument, "Lipschitz constant must be non-negative");
  if (k < g.lipschitz() - kTolerance)
    throw Error(Errc::InvalidArgument, "K is below the Lipschitz constant of the test functions");
}

}  // namespace

double moment_discrepancy_bound(const GSystem& g, double eps, double lipschitz_k, double bad_pair_mass) {
  check_bound_inputs(g, eps, lipschitz_k);
  if (!(bad_pair_mass >= 0.0)) throw Error(Errc::InvalidArgument, "bad pair mass must be non-negative");
  const auto pairs = g.indexed_pairs();
  double lipschitz_term = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].first == pairs[p].second) continue;
    double others = 1.0;
    for (std::size_t q = 0; q < pairs.size(); ++q)
      if (q != p) others *= g.at(pairs[q].first, pairs[q].second).sup_norm();
    lipschitz_term += others;
  }
  return 2.0 * g.c_g() * pair_count_bound(g) * bad_pair_mass + lipschitz_k * eps * lipschitz_term;
}

double moment_discrepancy_bound(const GSystem& g, double eps, double lipschitz_k) {
  const double e = std::min(std::max(eps, 0.0), 1.0);
  return moment_discrepancy_bound(g, eps, lipschitz_k, 1.0 - (1.0 - e) * (1.0 - e));
}

double moment_discrepancy_bound(const GSystem& g, const Box1Result& witness, double lipschitz_k) {
  return moment_discrepancy_bound(g, witness.value, lipschitz_k, witness.bad_pair_mass);
}

double printed_moment_discrepancy_bound(const GSystem& g, double eps, double lipschitz_k, double measure_term) {
  check_bound_inputs(g, eps, lipschitz_k);
  const double p = pair_count_bound(g);
  return 2.0 * g.c_g() * p * measure_term + std::pow(2.0 * lipschitz_k * eps * g.max_sup_norm(), p);
}

}  // namespace mmspace
