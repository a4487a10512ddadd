#ifndef METFA_SAMPLE_MATRIX_HPP
#define METFA_SAMPLE_MATRIX_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace metfa {

struct SpatialShape {
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  std::size_t area() const { return static_cast<std::size_t>(width) * height; }
  bool operator==(const SpatialShape&) const = default;
};

// N sampled attribution rows over F features, stored sample-major.
// Entry (i, j) is the score of feature j in the i-th sampled explanation.
class SampleMatrix {
 public:
  // Throws DomainError on empty dimensions, size mismatch or a shape whose
  // area differs from n_features; NonFiniteValue on NaN/inf entries.
  SampleMatrix(std::size_t n_samples, std::size_t n_features, std::vector<double> values,
               std::optional<SpatialShape> shape = std::nullopt, bool tie_broken = false);

  // Builds a matrix from equally long rows.
  static SampleMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                std::optional<SpatialShape> shape = std::nullopt);

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_features() const { return n_features_; }
  const std::optional<SpatialShape>& shape() const { return shape_; }
  bool tie_broken() const { return tie_broken_; }

  double at(std::size_t sample, std::size_t feature) const {
    return values_[sample * n_features_ + feature];
  }
  std::span<const double> row(std::size_t sample) const {
    return {values_.data() + sample * n_features_, n_features_};
  }
  std::span<const double> values() const { return values_; }

  // Scores of one feature across all samples, in sample order.
  std::vector<double> column(std::size_t feature) const;

  bool operator==(const SampleMatrix&) const = default;

 private:
  std::size_t n_samples_;
  std::size_t n_features_;
  std::vector<double> values_;
  std::optional<SpatialShape> shape_;
  bool tie_broken_;
};

// Min-max rescales every row to [0, 1]; constant rows become all 0.5.
SampleMatrix normalize_rows(const SampleMatrix& matrix);

// Same rule for a single attribution map.
std::vector<double> min_max_normalize(std::span<const double> scores);

}  // namespace metfa

#endif  // METFA_SAMPLE_MATRIX_HPP
