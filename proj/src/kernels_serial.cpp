#include <algorithm>
#include <cmath>

#include "metfa/kernels.hpp"

namespace metfa::kernels::serial {

std::vector<std::uint32_t> count_at_or_above(const SampleMatrix& m, double h) {
  std::vector<std::uint32_t> counts(m.n_features(), 0);
  for (std::size_t i = 0; i < m.n_samples(); ++i) {
    for (std::size_t j = 0; j < m.n_features(); ++j) {
      if (m.at(i, j) >= h) ++counts[j];
    }
  }
  return counts;
}

OrderStatistics order_statistics(const SampleMatrix& m, std::size_t k1, std::size_t k2) {
  const std::size_t f = m.n_features();
  OrderStatistics out{std::vector<double>(f), std::vector<double>(f), std::vector<double>(f)};
  for (std::size_t j = 0; j < f; ++j) {
    auto col = m.column(j);
    std::sort(col.begin(), col.end());
    out.lower[j] = k1 >= 1 ? col[k1 - 1] : col.front();
    out.upper[j] = col[k2 - 1];
    double sum = 0.0;
    for (std::size_t a = k1; a + 1 < k2; ++a) sum += col[a];
    out.smoothed[j] = sum / static_cast<double>(k2 - k1 - 1);
  }
  return out;
}

std::vector<double> column_means(const SampleMatrix& m) {
  std::vector<double> means(m.n_features());
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.n_samples(); ++i) sum += m.at(i, j);
    means[j] = sum / static_cast<double>(m.n_samples());
  }
  return means;
}

std::vector<double> column_stddev(const SampleMatrix& m) {
  // Shifted by the first sample so constant columns give exactly zero.
  std::vector<double> out(m.n_features());
  const double n = static_cast<double>(m.n_samples());
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    const double shift = m.at(0, j);
    double sum = 0.0;
    for (std::size_t i = 0; i < m.n_samples(); ++i) sum += m.at(i, j) - shift;
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < m.n_samples(); ++i) {
      const double d = (m.at(i, j) - shift) - mean;
      ss += d * d;
    }
    out[j] = std::sqrt(ss / static_cast<double>(m.n_samples()));
  }
  return out;
}

}  // namespace metfa::kernels::serial
