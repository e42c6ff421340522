#include "mmspace/gsystem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmspace/error.hpp"

namespace mmspace {

TestFunction TestFunction::monomial(unsigned power) {
  TestFunction f;
  f.monomial_ = true;
  f.power_ = power;
  f.sup_norm_ = 1.0;
  f.lipschitz_ = static_cast<double>(power);
  return f;
}

TestFunction TestFunction::piecewise_linear(std::vector<std::pair<double, double>> breakpoints) {
  if (breakpoints.size() < 2) throw Error(Errc::InvalidArgument, "piecewise-linear function needs >= 2 breakpoints");
  if (breakpoints.front().first != 0.0 || breakpoints.back().first != 1.0)
    throw Error(Errc::InvalidArgument, "breakpoints must start at 0 and end at 1");
  TestFunction f;
  f.monomial_ = false;
  f.sup_norm_ = 0.0;
  f.lipschitz_ = 0.0;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    const auto [x, y] = breakpoints[i];
    if (!std::isfinite(y)) throw Error(Errc::InvalidArgument, "breakpoint value is not finite", {i});
    f.sup_norm_ = std::max(f.sup_norm_, std::abs(y));
    if (i > 0) {
      const auto [px, py] = breakpoints[i - 1];
      if (!(x > px)) throw Error(Errc::InvalidArgument, "breakpoints must be strictly increasing", {i});
      f.lipschitz_ = std::max(f.lipschitz_, std::abs(y - py) / (x - px));
    }
  }
  f.breakpoints_ = std::move(breakpoints);
  return f;
}

TestFunction TestFunction::constant(double value) { return piecewise_linear({{0.0, value}, {1.0, value}}); }

double TestFunction::operator()(double t) const {
  if (monomial_) {
    double r = 1.0;
    for (unsigned k = 0; k < power_; ++k) r *= t;
    return r;
  }
  const auto& bp = breakpoints_;
  if (t <= bp.front().first) return bp.front().second;
  if (t >= bp.back().first) return bp.back().second;
  auto it = std::upper_bound(bp.begin(), bp.end(), t, [](double v, const auto& p) { return v < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double s = (t - lo.first) / (hi.first - lo.first);
  return lo.second + s * (hi.second - lo.second);
}

double TestFunction::integrate(const DiscreteDistribution& mu) const {
  return mu.expect([this](double v) { return (*this)(v); });
}

std::string TestFunction::id() const {
  std::ostringstream os;
  if (monomial_) {
    os << "t^" << power_;
  } else {
    os.precision(17);
    os << "pl[";
    for (std::size_t i = 0; i < breakpoints_.size(); ++i)
      os << (i ? "," : "") << breakpoints_[i].first << ':' << breakpoints_[i].second;
    os << ']';
  }
  return os.str();
}

GSystem::GSystem(std::size_t order, std::vector<TestFunction> pair_functions, bool include_diagonal)
    : order_(order), funcs_(std::move(pair_functions)), include_diagonal_(include_diagonal) {
  if (order_ < 1) throw Error(Errc::InvalidArgument, "system order must be >= 1");
  if (funcs_.size() != order_ * (order_ + 1) / 2)
    throw Error(Errc::DimensionMismatch, "expected r(r+1)/2 pair functions");
}

GSystem GSystem::uniform(std::size_t order, const TestFunction& f, bool include_diagonal) {
  std::vector<TestFunction> funcs;
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = i; j < order; ++j)
      funcs.push_back(i == j && !include_diagonal ? TestFunction::monomial(0) : f);
  return GSystem(order, std::move(funcs), include_diagonal);
}

GSystem GSystem::monomials(std::size_t order, const std::vector<unsigned>& off_diagonal_powers) {
  if (off_diagonal_powers.size() != order * (order - 1) / 2)
    throw Error(Errc::DimensionMismatch, "expected r(r-1)/2 powers");
  std::vector<TestFunction> funcs;
  std::size_t p = 0;
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = i; j < order; ++j)
      funcs.push_back(TestFunction::monomial(i == j ? 0U : off_diagonal_powers[p++]));
  return GSystem(order, std::move(funcs), false);
}

std::size_t GSystem::index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row i of the upper triangle starts after sum_{a<i} (r - a) entries.
  return i * order_ - i * (i - 1) / 2 + (j - i);
}

const TestFunction& GSystem::at(std::size_t i, std::size_t j) const { return funcs_.at(index(i, j)); }

std::vector<std::pair<std::size_t, std::size_t>> GSystem::off_diagonal_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < order_; ++i)
    for (std::size_t j = i + 1; j < order_; ++j) pairs.emplace_back(i, j);
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> GSystem::indexed_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < order_; ++i)
    for (std::size_t j = include_diagonal_ ? i : i + 1; j < order_; ++j) pairs.emplace_back(i, j);
  return pairs;
}

double GSystem::c_g() const {
  double c = 1.0;
  for (auto [i, j] : indexed_pairs()) c *= at(i, j).sup_norm();
  return c;
}

double GSystem::lipschitz() const {
  double k = 0.0;
  for (auto [i, j] : indexed_pairs()) k = std::max(k, at(i, j).lipschitz());
  return k;
}

double GSystem::max_sup_norm() const {
  double s = 0.0;
  for (auto [i, j] : indexed_pairs()) s = std::max(s, at(i, j).sup_norm());
  return s;
}

double GSystem::diagonal_constant() const {
  if (!include_diagonal_) return 1.0;
  double c = 1.0;
  for (std::size_t i = 0; i < order_; ++i) c *= at(i, i)(0.0);
  return c;
}

std::string GSystem::id() const {
  std::ostringstream os;
  os << "r=" << order_ << (include_diagonal_ ? ";diag" : "") << ';';
  bool first = true;
  for (auto [i, j] : indexed_pairs()) {
    os << (first ? "" : ",") << at(i, j).id();
    first = false;
  }
  return os.str();
}

}  // namespace mmspace
