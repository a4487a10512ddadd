#include <algorithm>
#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "metfa/kernels.hpp"

namespace metfa::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace omp {

std::vector<std::uint32_t> count_at_or_above(const SampleMatrix& m, double h) {
  const auto n = static_cast<std::int64_t>(m.n_samples());
  const auto f = static_cast<std::int64_t>(m.n_features());
  const double* data = m.values().data();
  std::vector<std::uint32_t> counts(m.n_features(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < f; ++j) {
    std::uint32_t c = 0;
    for (std::int64_t i = 0; i < n; ++i) c += data[i * f + j] >= h ? 1u : 0u;
    counts[j] = c;
  }
  return counts;
}

OrderStatistics order_statistics(const SampleMatrix& m, std::size_t k1, std::size_t k2) {
  const auto n = static_cast<std::int64_t>(m.n_samples());
  const auto f = static_cast<std::int64_t>(m.n_features());
  const double* data = m.values().data();
  OrderStatistics out{std::vector<double>(m.n_features()), std::vector<double>(m.n_features()),
                      std::vector<double>(m.n_features())};
  const auto first = static_cast<std::ptrdiff_t>(k1);
  const auto last = static_cast<std::ptrdiff_t>(k2 - 1);  // 0-based index of the k2-th smallest

#pragma omp parallel
  {
    std::vector<double> col(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
    for (std::int64_t j = 0; j < f; ++j) {
      for (std::int64_t i = 0; i < n; ++i) col[i] = data[i * f + j];
      auto begin = col.begin();
      // Partition so that [0, last) holds the smaller ranks, then pull the
      // k1-th smallest into place and sort only the trimmed middle.
      std::nth_element(begin, begin + last, col.end());
      double lower;
      if (first >= 1) {
        std::nth_element(begin, begin + (first - 1), begin + last);
        lower = col[first - 1];
      } else {
        lower = *std::min_element(col.begin(), col.end());
      }
      std::sort(begin + first, begin + last);
      double sum = 0.0;
      for (auto a = first; a < last; ++a) sum += col[a];
      out.lower[j] = lower;
      out.upper[j] = col[last];
      out.smoothed[j] = sum / static_cast<double>(k2 - k1 - 1);
    }
  }
  return out;
}

std::vector<double> column_means(const SampleMatrix& m) {
  const auto n = static_cast<std::int64_t>(m.n_samples());
  const auto f = static_cast<std::int64_t>(m.n_features());
  const double* data = m.values().data();
  std::vector<double> means(m.n_features());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < f; ++j) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += data[i * f + j];
    means[j] = sum / static_cast<double>(n);
  }
  return means;
}

std::vector<double> column_stddev(const SampleMatrix& m) {
  const auto n = static_cast<std::int64_t>(m.n_samples());
  const auto f = static_cast<std::int64_t>(m.n_features());
  const double* data = m.values().data();
  std::vector<double> out(m.n_features());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < f; ++j) {
    const double shift = data[j];
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += data[i * f + j] - shift;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = (data[i * f + j] - shift) - mean;
      ss += d * d;
    }
    out[j] = std::sqrt(ss / static_cast<double>(n));
  }
  return out;
}

}  // namespace omp
}  // namespace metfa::kernels
