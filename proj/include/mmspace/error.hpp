#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmspace {

enum class Errc {
  InvalidArgument,
  DimensionMismatch,
  BadWeights,
  NonSymmetric,
  NonZeroDiagonal,
  DistanceOutOfRange,
  TriangleViolation,
  SelfLoop,
  ZeroMultiplicity,
  TooLarge,
  NonPositiveEpsilon,
  NonPositiveDelta,
  BadTarget,
  NotLipschitz,
  InfeasibleKappas,
  ExactBudgetExceeded,
  CliqueSearchBudgetExceeded,
  GridMismatch,
  CoverBudgetExceeded,
  RefinementTooLarge,
  UnknownFamily,
  NotConverged,
  Parse,
};

std::string_view errc_name(Errc code);

/// Every fallible operation in the library throws this. `indices()` names the
/// offending points (pair, triple, ...) when the error is about specific data.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::vector<std::size_t> indices = {})
      : std::runtime_error(message), code_(code), indices_(std::move(indices)) {}

  Errc code() const noexcept { return code_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  Errc code_;
  std::vector<std::size_t> indices_;
};

}  // namespace mmspace
