#ifndef METFA_MAP_BUILDER_HPP
#define METFA_MAP_BUILDER_HPP

// Turns sampled explanations into the median-test outputs: a ternary
// significance map, the trimmed-mean smoothed map and the lower/upper
// confidence-bound maps, plus the plain-mean baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "metfa/sample_matrix.hpp"
#include "metfa/stat_core.hpp"

namespace metfa {

enum class Significance : std::int8_t { kUnimportant = -1, kUndecided = 0, kImportant = 1 };

struct SignificanceMap {
  std::vector<Significance> labels;
  std::vector<std::uint32_t> counts;  // ct_j(h)
  double threshold_h = 0.0;
  double alpha = 0.0;
};

struct ConfidenceBundle {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> smoothed;
  ConfidenceIndices indices;
};

// What the lower bound reports when k1 == 0 (no order statistic below).
enum class LowerFloor {
  kColumnMinimum,  // unbounded scores: the smallest sample stands in for -inf
  kZero,           // scores normalized to [0, 1]
};

// Adds N(0, variance) to every entry. The perturbation of entry (i, j) comes
// from the stream (seed, feature j) at draw i, so the result does not depend
// on thread count. variance == 0 returns the input unchanged.
SampleMatrix tie_break(const SampleMatrix& matrix, double variance, std::uint64_t seed);

// Two-group natural-breaks threshold: the split of the sorted values that
// minimizes the total within-group sum of squares, returned as the midpoint
// of the boundary pair. Ties prefer the more balanced split, then the lower
// split index. Throws DegenerateInput when all values are equal.
double jenks_break(std::span<const double> values);

// Labels each feature +1 when the median is significantly above h, -1 when
// significantly below, 0 otherwise. Throws InsufficientSamples when
// n_samples < min_samples(alpha, one-sided).
SignificanceMap significance_map(const SampleMatrix& matrix, double h, double alpha);

// Order-statistic confidence interval and trimmed mean for every feature.
// Throws InsufficientSamples (from confidence_indices) or EmptyTrim.
ConfidenceBundle confidence_bundle(const SampleMatrix& matrix, double alpha,
                                   LowerFloor floor = LowerFloor::kColumnMinimum);

// Per-feature mean of all samples (the SmoothGrad estimate).
std::vector<double> smoothgrad_map(const SampleMatrix& matrix);

}  // namespace metfa

#endif  // METFA_MAP_BUILDER_HPP
