#include "mmspace/kernels.hpp"

#include <cstddef>

#include "mmspace/error.hpp"

namespace mmspace::kernels {

namespace {

struct Plan {
  const TupleSum* problem;
  std::size_t n;
  // ending[d] lists (start coordinate, table) for every pair whose larger
  // coordinate is d.
  std::vector<std::vector<std::pair<std::size_t, const Matrix*>>> ending;
};

Plan make_plan(const TupleSum& problem) {
  if (problem.order < 1) throw Error(Errc::InvalidArgument, "tuple order must be >= 1");
  if (problem.pairs.size() != problem.tables.size())
    throw Error(Errc::DimensionMismatch, "one table per pair is required");
  Plan plan{&problem, problem.weights.size(), std::vector<std::vector<std::pair<std::size_t, const Matrix*>>>(problem.order)};
  for (std::size_t p = 0; p < problem.pairs.size(); ++p) {
    auto [i, j] = problem.pairs[p];
    if (!(i < j && j < problem.order)) throw Error(Errc::InvalidArgument, "pairs must satisfy i < j < r");
    if (problem.tables[p]->size() != plan.n) throw Error(Errc::DimensionMismatch, "table size mismatch");
    plan.ending[j].emplace_back(i, problem.tables[p]);
  }
  return plan;
}

double descend(const Plan& plan, std::size_t depth, std::vector<std::size_t>& idx) {
  const auto w = plan.problem->weights;
  const auto& ending = plan.ending[depth];
  std::vector<const double*> rows;
  rows.reserve(ending.size());
  for (auto [start, table] : ending) rows.push_back(table->row(idx[start]).data());

  double acc = 0.0;
  if (depth + 1 == plan.problem->order) {
    for (std::size_t a = 0; a < plan.n; ++a) {
      double v = w[a];
      for (const double* r : rows) v *= r[a];
      acc += v;
    }
    return acc;
  }
  for (std::size_t a = 0; a < plan.n; ++a) {
    double f = w[a];
    for (const double* r : rows) f *= r[a];
    if (f == 0.0) continue;
    idx[depth] = a;
    acc += f * descend(plan, depth + 1, idx);
  }
  return acc;
}

}  // namespace

double tuple_sum(const TupleSum& problem) {
  const Plan plan = make_plan(problem);
  if (plan.n == 0) return 0.0;
  if (problem.order == 1) {
    double s = 0.0;
    for (double w : problem.weights) s += w;
    return s;
  }
  const auto n = static_cast<std::ptrdiff_t>(plan.n);
  std::vector<double> partial(plan.n, 0.0);
#pragma omp parallel
  {
    std::vector<std::size_t> idx(problem.order, 0);
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t a = 0; a < n; ++a) {
      idx[0] = static_cast<std::size_t>(a);
      partial[idx[0]] = problem.weights[idx[0]] * descend(plan, 1, idx);
    }
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double tuple_sum_serial(const TupleSum& problem) {
  make_plan(problem);
  const std::size_t n = problem.weights.size();
  const std::size_t r = problem.order;
  if (n == 0) return 0.0;
  std::vector<std::size_t> idx(r, 0);
  double total = 0.0;
  while (true) {
    double term = 1.0;
    for (std::size_t k = 0; k < r; ++k) term *= problem.weights[idx[k]];
    for (std::size_t p = 0; p < problem.pairs.size(); ++p) {
      auto [i, j] = problem.pairs[p];
      term *= (*problem.tables[p])(idx[i], idx[j]);
    }
    total += term;
    std::size_t k = r;
    while (k > 0) {
      --k;
      if (++idx[k] < n) break;
      idx[k] = 0;
      if (k == 0) return total;
    }
  }
}

}  // namespace mmspace::kernels
