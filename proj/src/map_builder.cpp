#include "metfa/map_builder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "metfa/errors.hpp"
#include "metfa/kernels.hpp"
#include "metfa/rng.hpp"

namespace metfa {

SampleMatrix tie_break(const SampleMatrix& matrix, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw DomainError("tie-break variance must be a nonnegative finite number");
  }
  if (variance == 0.0) return matrix;

  const double sigma = std::sqrt(variance);
  const auto n = static_cast<std::int64_t>(matrix.n_samples());
  const auto f = static_cast<std::int64_t>(matrix.n_features());
  std::vector<double> values(matrix.values().begin(), matrix.values().end());

#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < f; ++j) {
    RngStream rng(seed, StreamPurpose::kTieBreak, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::int64_t i = 0; i < n; ++i) values[i * f + j] += noise(rng);
  }
  return SampleMatrix(matrix.n_samples(), matrix.n_features(), std::move(values), matrix.shape(),
                      /*tie_broken=*/true);
}

double jenks_break(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("natural breaks need at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw DegenerateInput("natural breaks undefined: all values are identical");
  }
  const std::size_t n = sorted.size();

  // left_sse[s]: within-group sum of squares of sorted[0, s), Welford-updated.
  std::vector<double> left_sse(n + 1, 0.0);
  {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = sorted[i] - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (sorted[i] - mean);
      left_sse[i + 1] = m2;
    }
  }
  std::vector<double> right_sse(n + 1, 0.0);  // sorted[s, n)
  {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      const double delta = sorted[i] - mean;
      mean += delta / static_cast<double>(n - i);
      m2 += delta * (sorted[i] - mean);
      right_sse[i] = m2;
    }
  }

  const double tolerance = 1e-12 * std::max(left_sse[n], 1e-300);
  std::size_t best = 1;  // lower group is sorted[0, best)
  double best_cost = left_sse[1] + right_sse[1];
  auto imbalance = [n](std::size_t s) {
    return s > n - s ? s - (n - s) : (n - s) - s;
  };
  for (std::size_t s = 2; s < n; ++s) {
    const double cost = left_sse[s] + right_sse[s];
    if (cost < best_cost - tolerance) {
      best = s;
      best_cost = cost;
    } else if (std::abs(cost - best_cost) <= tolerance && imbalance(s) < imbalance(best)) {
      best = s;
      best_cost = std::min(cost, best_cost);
    }
  }
  return 0.5 * (sorted[best - 1] + sorted[best]);
}

SignificanceMap significance_map(const SampleMatrix& matrix, double h, double alpha) {
  const std::size_t n = matrix.n_samples();
  const std::size_t required = min_samples(alpha, Sided::kOne);
  if (n < required) {
    throw InsufficientSamples(n, required,
                              "need at least " + std::to_string(required) +
                                  " samples for a one-sided test at alpha=" +
                                  std::to_string(alpha) + ", got " + std::to_string(n));
  }
  if (!std::isfinite(h)) throw DomainError("threshold must be finite");

  // The label depends only on the count, so tabulate it once.
  std::vector<Significance> by_count(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    if (pvalue_median_leq(n, k).rejects_at(alpha)) {
      by_count[k] = Significance::kImportant;
    } else if (pvalue_median_geq(n, k).rejects_at(alpha)) {
      by_count[k] = Significance::kUnimportant;
    } else {
      by_count[k] = Significance::kUndecided;
    }
  }

  SignificanceMap out;
  out.counts = kernels::omp::count_at_or_above(matrix, h);
  out.labels.reserve(out.counts.size());
  for (auto c : out.counts) out.labels.push_back(by_count[c]);
  out.threshold_h = h;
  out.alpha = alpha;
  return out;
}

ConfidenceBundle confidence_bundle(const SampleMatrix& matrix, double alpha, LowerFloor floor) {
  const auto indices = confidence_indices(matrix.n_samples(), alpha);
  if (indices.k2 < indices.k1 + 2) {
    throw EmptyTrim("no order statistic strictly between ranks " + std::to_string(indices.k1) +
                    " and " + std::to_string(indices.k2));
  }
  auto stats = kernels::omp::order_statistics(matrix, indices.k1, indices.k2);
  if (indices.k1 == 0 && floor == LowerFloor::kZero) {
    std::fill(stats.lower.begin(), stats.lower.end(), 0.0);
  }
  return {std::move(stats.lower), std::move(stats.upper), std::move(stats.smoothed), indices};
}

std::vector<double> smoothgrad_map(const SampleMatrix& matrix) {
  return kernels::omp::column_means(matrix);
}

}  // namespace metfa
