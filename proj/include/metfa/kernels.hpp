#ifndef METFA_KERNELS_HPP
#define METFA_KERNELS_HPP

// Per-feature kernels behind the map builder. Each exists twice: a plain
// serial version kept as the reference, and an OpenMP version parallel over
// features. Both produce bit-identical results; tests assert it.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "metfa/sample_matrix.hpp"

namespace metfa::kernels {

struct OrderStatistics {
  std::vector<double> lower;     // k1-th smallest, or the column minimum if k1 == 0
  std::vector<double> upper;     // k2-th smallest
  std::vector<double> smoothed;  // mean of ranks k1+1 .. k2-1
};

namespace serial {

// ct_j(h) for every feature j.
std::vector<std::uint32_t> count_at_or_above(const SampleMatrix& m, double h);

// Requires 0 <= k1, k1 + 2 <= k2 <= n_samples.
OrderStatistics order_statistics(const SampleMatrix& m, std::size_t k1, std::size_t k2);

std::vector<double> column_means(const SampleMatrix& m);

// Population standard deviation of every column.
std::vector<double> column_stddev(const SampleMatrix& m);

}  // namespace serial

namespace omp {

std::vector<std::uint32_t> count_at_or_above(const SampleMatrix& m, double h);
OrderStatistics order_statistics(const SampleMatrix& m, std::size_t k1, std::size_t k2);
std::vector<double> column_means(const SampleMatrix& m);
std::vector<double> column_stddev(const SampleMatrix& m);

}  // namespace omp

// Threads OpenMP will use (1 when built without OpenMP).
int max_threads();

}  // namespace metfa::kernels

#endif  // METFA_KERNELS_HPP
