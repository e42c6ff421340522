#pragma once

// Data-parallel inner loops. Every parallel kernel has a serial counterpart
// kept for testing and benchmarking; parallel results never depend on the
// number of threads because work is split into fixed units and reduced in a
// fixed order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mmspace/matrix.hpp"
#include "mmspace/rng.hpp"

namespace mmspace::kernels {

/// sum over r-tuples (a_0..a_{r-1}) of prod_k w[a_k] * prod_p table_p(a_i, a_j)
/// where pair p = (i, j), i < j. Tuples are taken with repetition.
struct TupleSum {
  std::span<const double> weights;
  std::size_t order = 1;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<const Matrix*> tables;
};

/// Depth-first evaluation, parallel over the first tuple coordinate.
double tuple_sum(const TupleSum& problem);
/// Plain odometer over all n^r tuples; the reference for tuple_sum.
double tuple_sum_serial(const TupleSum& problem);

/// Running mean / second moment (Welford), mergeable in a fixed order.
struct McStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const McStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double n = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / n;
    m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / n;
    count += other.count;
  }

  double variance() const { return count > 1 ? std::max(0.0, m2) / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

/// Samples per Monte-Carlo chunk. Chunk c draws from Rng(seed + c).
inline constexpr std::uint64_t kChunkSize = 1U << 14;

/// Runs `samples` draws split into fixed chunks. `make_drawer()` is called once
/// per chunk and must return a callable `double(Rng&)` owning any scratch
/// state. Chunks run in parallel; per-chunk statistics are merged in chunk
/// order so the result is bitwise independent of the thread count.
template <typename DrawerFactory>
McStats monte_carlo(std::uint64_t samples, std::uint64_t seed, DrawerFactory&& make_drawer, bool parallel = true) {
  const std::uint64_t chunks = (samples + kChunkSize - 1) / kChunkSize;
  std::vector<McStats> per_chunk(chunks);
  const auto count = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::int64_t c = 0; c < count; ++c) {
    const auto uc = static_cast<std::uint64_t>(c);
    Rng rng(seed + uc);
    auto draw = make_drawer();
    const std::uint64_t todo = std::min(kChunkSize, samples - uc * kChunkSize);
    McStats& stats = per_chunk[uc];
    for (std::uint64_t k = 0; k < todo; ++k) stats.push(draw(rng));
  }
  McStats total;
  for (const McStats& s : per_chunk) total.merge(s);
  return total;
}

}  // namespace mmspace::kernels
