#include "metfa/sample_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metfa/errors.hpp"

namespace metfa {

SampleMatrix::SampleMatrix(std::size_t n_samples, std::size_t n_features,
                           std::vector<double> values, std::optional<SpatialShape> shape,
                           bool tie_broken)
    : n_samples_(n_samples),
      n_features_(n_features),
      values_(std::move(values)),
      shape_(shape),
      tie_broken_(tie_broken) {
  if (n_samples_ == 0 || n_features_ == 0) {
    throw DomainError("sample matrix needs at least one sample and one feature");
  }
  if (values_.size() != n_samples_ * n_features_) {
    throw DomainError("sample matrix holds " + std::to_string(values_.size()) +
                      " values, expected " + std::to_string(n_samples_ * n_features_));
  }
  if (shape_ && shape_->area() != n_features_) {
    throw DomainError("spatial shape " + std::to_string(shape_->width) + "x" +
                      std::to_string(shape_->height) + " does not cover " +
                      std::to_string(n_features_) + " features");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) throw NonFiniteValue(k / n_features_, k % n_features_);
  }
}

SampleMatrix SampleMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                     std::optional<SpatialShape> shape) {
  if (rows.empty()) throw DomainError("sample matrix needs at least one row");
  const std::size_t f = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * f);
  for (const auto& r : rows) {
    if (r.size() != f) throw DomainError("rows of a sample matrix must have equal length");
    values.insert(values.end(), r.begin(), r.end());
  }
  return SampleMatrix(rows.size(), f, std::move(values), shape);
}

std::vector<double> SampleMatrix::column(std::size_t feature) const {
  std::vector<double> out(n_samples_);
  for (std::size_t i = 0; i < n_samples_; ++i) out[i] = at(i, feature);
  return out;
}

std::vector<double> min_max_normalize(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double min = *lo;
  const double range = *hi - *lo;
  if (!(range > 0.0)) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (double& v : out) v = (v - min) / range;
  return out;
}

SampleMatrix normalize_rows(const SampleMatrix& matrix) {
  std::vector<double> values;
  values.reserve(matrix.values().size());
  for (std::size_t i = 0; i < matrix.n_samples(); ++i) {
    const auto row = min_max_normalize(matrix.row(i));
    values.insert(values.end(), row.begin(), row.end());
  }
  return SampleMatrix(matrix.n_samples(), matrix.n_features(), std::move(values), matrix.shape(),
                      matrix.tie_broken());
}

}  // namespace metfa
