#ifndef METFA_METRICS_HPP
#define METFA_METRICS_HPP

// Faithfulness and stability metrics for attribution maps.
//
// Image-style metrics progressively keep (insertion) or remove (deletion)
// the top-ranked features and average the target score over K+1 evenly
// spaced fractions, normalized by the clean score. Text-style metrics act on
// the top-n tokens. Robust variants average a metric over outer-noise draws
// with the map held fixed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metfa/sample_matrix.hpp"
#include "metfa/sampling.hpp"

namespace metfa {

// Scores at or below this are treated as zero when normalizing.
inline constexpr double kZeroScoreGuard = 1e-9;

// Feature indices by descending score; equal scores keep ascending index.
std::vector<std::size_t> rank_features(std::span<const double> map);

// Throws ZeroScore when f_c(input) <= kZeroScoreGuard, DomainError when the
// map length differs from the input or steps == 0.
double insertion(const Predictor& predictor, const FeatureVector& input,
                 std::span<const double> map, std::size_t label, std::size_t steps = 100);
double deletion(const Predictor& predictor, const FeatureVector& input,
                std::span<const double> map, std::size_t label, std::size_t steps = 100);

inline double overall(double insertion_value, double deletion_value) {
  return insertion_value - deletion_value;
}

struct RobustFaithfulness {
  double ri = 0.0;
  double rd = 0.0;
  double ro = 0.0;  // ri - rd
};

// Insertion and deletion on `draws` noisy copies of the input; draw d uses
// stream (seed, d) and is shared by both curves. A none-noise spec reduces to
// the plain metrics.
RobustFaithfulness robust_faithfulness(const Predictor& predictor, const FeatureVector& input,
                                       std::span<const double> map, std::size_t label,
                                       const NoiseSpec& spec, std::size_t draws,
                                       std::size_t steps, std::uint64_t seed);

double robust_insertion(const Predictor& predictor, const FeatureVector& input,
                        std::span<const double> map, std::size_t label, const NoiseSpec& spec,
                        std::size_t draws, std::size_t steps, std::uint64_t seed);
double robust_deletion(const Predictor& predictor, const FeatureVector& input,
                       std::span<const double> map, std::size_t label, const NoiseSpec& spec,
                       std::size_t draws, std::size_t steps, std::uint64_t seed);

// Grand mean over inputs and features of the population standard deviation
// across each input's noisy explanations (the rows of its matrix). Every
// matrix needs at least 2 rows.
double mstd(std::span<const SampleMatrix> explanations_per_input);

enum class DeletionMode {
  kRemove,  // delete positions, shortening the sequence
  kMask,    // overwrite positions with a mask token
};

struct TextMetricOptions {
  DeletionMode deletion = DeletionMode::kRemove;
  std::string mask_token = "<unk>";
};

// Target score after deleting the top-n tokens.
double fdt(const Predictor& predictor, const TokenSequence& tokens, std::span<const double> map,
           std::size_t label, std::size_t n, const TextMetricOptions& options = {});
// Target score after keeping the top-n tokens and taking every other
// position from `donor`.
double fat(const Predictor& predictor, const TokenSequence& tokens, std::span<const double> map,
           std::size_t label, std::size_t n, const TokenSequence& donor);
// Target score of the top-n tokens alone, in original order.
double st(const Predictor& predictor, const TokenSequence& tokens, std::span<const double> map,
          std::size_t label, std::size_t n);

struct RobustText {
  double rfdt = 0.0;
  double rfat = 0.0;
  double rst = 0.0;
};

// FDT/FAT/ST averaged over `draws` noisy copies of the sequence. FAT is only
// evaluated when a donor is given (rfat stays 0 otherwise).
RobustText robust_text(const Predictor& predictor, const TokenSequence& tokens,
                       std::span<const double> map, std::size_t label, std::size_t n,
                       const NoiseSpec& spec, std::size_t draws, std::uint64_t seed,
                       const TokenSequence* donor = nullptr,
                       const TextMetricOptions& options = {});

double robust_fdt(const Predictor& predictor, const TokenSequence& tokens,
                  std::span<const double> map, std::size_t label, std::size_t n,
                  const NoiseSpec& spec, std::size_t draws, std::uint64_t seed,
                  const TextMetricOptions& options = {});
double robust_fat(const Predictor& predictor, const TokenSequence& tokens,
                  std::span<const double> map, std::size_t label, std::size_t n,
                  const TokenSequence& donor, const NoiseSpec& spec, std::size_t draws,
                  std::uint64_t seed);
double robust_st(const Predictor& predictor, const TokenSequence& tokens,
                 std::span<const double> map, std::size_t label, std::size_t n,
                 const NoiseSpec& spec, std::size_t draws, std::uint64_t seed);

// Per-feature class scores of a segmentation model.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::vector<double> segment_scores(const FeatureVector& input) const = 0;
};

// 1 - Sum(relu(R * (F(I) - F((R or M) * I)))) / Sum(R) for binary masks R
// (segmentation) and M (explanation). Throws EmptyMask when R is empty.
double context_bias_faithfulness(const Segmenter& segmenter, const FeatureVector& input,
                                 std::span<const std::uint8_t> segmentation,
                                 std::span<const std::uint8_t> explanation);

// Mean of the score above over noisy inputs; both terms use the noisy input.
double robust_context_bias_faithfulness(const Segmenter& segmenter, const FeatureVector& input,
                                        std::span<const std::uint8_t> segmentation,
                                        std::span<const std::uint8_t> explanation,
                                        const NoiseSpec& spec, std::size_t draws,
                                        std::uint64_t seed);

// Named metric values plus the settings the robust ones were computed with.
struct MetricsReport {
  std::vector<std::pair<std::string, double>> values;
  std::string noise = "none";
  std::size_t draws = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;

  void set(const std::string& name, double value);
  std::optional<double> get(const std::string& name) const;
};

// Image-suite report: insertion, deletion, overall, ri, rd, ro.
MetricsReport image_metrics(const Predictor& predictor, const FeatureVector& input,
                            std::span<const double> map, std::size_t label,
                            const NoiseSpec& spec, std::size_t draws, std::size_t steps,
                            std::uint64_t seed);

struct StabilityComparison {
  double mstd_smoothed = 0.0;
  double mstd_mean = 0.0;
  std::optional<double> ratio;  // empty when mstd_mean == 0
  std::size_t k1 = 0;
  std::size_t k2 = 0;
};

// For each of `noisy_draws` outer-noise copies of the input, samples n
// explanations under the inner noise once and builds both the trimmed-mean
// map and the plain-mean map from those same samples; reports the mstd of
// each and their ratio.
StabilityComparison compare_stability(const Predictor& predictor, const Attributor& attributor,
                                      const Input& input, const NoiseSpec& inner,
                                      const NoiseSpec& outer, std::size_t n,
                                      std::size_t noisy_draws, double alpha, std::uint64_t seed);

}  // namespace metfa

#endif  // METFA_METRICS_HPP
