#include "metfa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "annotate.hpp"
#include "metfa/errors.hpp"
#include "metfa/kernels.hpp"
#include "metfa/map_builder.hpp"

namespace metfa {
namespace {

double score_of(const Predictor& predictor, const Input& input, std::size_t label) {
  const auto scores = predictor.predict(input);
  if (label >= scores.size()) throw DomainError("target label out of range");
  return scores[label];
}

void check_map(std::size_t n_features, std::span<const double> map) {
  if (map.size() != n_features) {
    throw DomainError("attribution map has " + std::to_string(map.size()) + " entries for " +
                      std::to_string(n_features) + " features");
  }
  if (n_features == 0) throw DomainError("empty input");
}

double clean_score(const Predictor& predictor, const FeatureVector& input, std::size_t label) {
  const double f = score_of(predictor, input, label);
  if (!(f > kZeroScoreGuard)) {
    throw ZeroScore("target score " + std::to_string(f) + " is too small to normalize by");
  }
  return f;
}

enum class Curve { kInsertion, kDeletion };

double curve(const Predictor& predictor, const FeatureVector& input, std::span<const double> map,
             std::size_t label, std::size_t steps, Curve kind) {
  check_map(input.size(), map);
  if (steps == 0) throw DomainError("curve needs at least one step");
  const double reference = clean_score(predictor, input, label);
  const auto order = rank_features(map);
  const std::size_t f = input.size();

  FeatureVector current = kind == Curve::kInsertion ? FeatureVector(f, 0.0) : input;
  std::size_t applied = 0;  // top features inserted or deleted so far
  double total = 0.0;
  for (std::size_t s = 0; s <= steps; ++s) {
    const std::size_t target = s * f / steps;
    for (; applied < target; ++applied) {
      const std::size_t j = order[applied];
      current[j] = kind == Curve::kInsertion ? input[j] : 0.0;
    }
    total += score_of(predictor, current, label);
  }
  return total / static_cast<double>(steps + 1) / reference;
}

// Runs `metric(noisy_input)` for each draw in parallel and returns the
// per-draw results in draw order.
template <typename Result, typename Metric>
std::vector<Result> per_draw(const Input& input, const NoiseSpec& spec, std::size_t draws,
                             std::uint64_t seed, Metric metric) {
  if (draws < 1) throw DomainError("robust metrics need at least one draw");
  std::vector<Result> results(draws);
  std::vector<std::exception_ptr> failures(draws);
  const auto count = static_cast<std::int64_t>(draws);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t d = 0; d < count; ++d) {
    try {
      RngStream rng(seed, StreamPurpose::kMetricDraw, static_cast<std::uint64_t>(d));
      results[d] = metric(apply_noise(spec, input, rng));
    } catch (...) {
      failures[d] = std::current_exception();
    }
  }
  for (std::size_t d = 0; d < draws; ++d) {
    if (failures[d]) detail::rethrow_annotated(failures[d], "draw " + std::to_string(d) + ": ");
  }
  return results;
}

std::vector<std::size_t> top_positions(const TokenSequence& tokens, std::span<const double> map,
                                       std::size_t n) {
  check_map(tokens.size(), map);
  if (n < 1 || n > tokens.size()) {
    throw DomainError("n must lie in [1, " + std::to_string(tokens.size()) + "], got " +
                      std::to_string(n));
  }
  auto order = rank_features(map);
  order.resize(n);
  return order;
}

std::vector<char> membership(std::size_t length, const std::vector<std::size_t>& positions) {
  std::vector<char> in(length, 0);
  for (auto p : positions) in[p] = 1;
  return in;
}

}  // namespace

std::vector<std::size_t> rank_features(std::span<const double> map) {
  std::vector<std::size_t> order(map.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return map[a] > map[b]; });
  return order;
}

double insertion(const Predictor& predictor, const FeatureVector& input,
                 std::span<const double> map, std::size_t label, std::size_t steps) {
  return curve(predictor, input, map, label, steps, Curve::kInsertion);
}

double deletion(const Predictor& predictor, const FeatureVector& input,
                std::span<const double> map, std::size_t label, std::size_t steps) {
  return curve(predictor, input, map, label, steps, Curve::kDeletion);
}

RobustFaithfulness robust_faithfulness(const Predictor& predictor, const FeatureVector& input,
                                       std::span<const double> map, std::size_t label,
                                       const NoiseSpec& spec, std::size_t draws,
                                       std::size_t steps, std::uint64_t seed) {
  check_map(input.size(), map);
  const auto pairs = per_draw<std::pair<double, double>>(
      input, spec, draws, seed, [&](const Input& noisy) {
        const auto& x = std::get<FeatureVector>(noisy);
        return std::pair{insertion(predictor, x, map, label, steps),
                         deletion(predictor, x, map, label, steps)};
      });
  RobustFaithfulness out;
  for (const auto& [ins, del] : pairs) {
    out.ri += ins;
    out.rd += del;
  }
  out.ri /= static_cast<double>(draws);
  out.rd /= static_cast<double>(draws);
  out.ro = out.ri - out.rd;
  return out;
}

double robust_insertion(const Predictor& predictor, const FeatureVector& input,
                        std::span<const double> map, std::size_t label, const NoiseSpec& spec,
                        std::size_t draws, std::size_t steps, std::uint64_t seed) {
  return robust_faithfulness(predictor, input, map, label, spec, draws, steps, seed).ri;
}

double robust_deletion(const Predictor& predictor, const FeatureVector& input,
                       std::span<const double> map, std::size_t label, const NoiseSpec& spec,
                       std::size_t draws, std::size_t steps, std::uint64_t seed) {
  return robust_faithfulness(predictor, input, map, label, spec, draws, steps, seed).rd;
}

double mstd(std::span<const SampleMatrix> explanations_per_input) {
  if (explanations_per_input.empty()) throw DomainError("mstd needs at least one input");
  double total = 0.0;
  std::size_t cells = 0;
  for (const auto& m : explanations_per_input) {
    if (m.n_samples() < 2) throw DomainError("mstd needs at least 2 noisy explanations per input");
    for (double s : kernels::omp::column_stddev(m)) total += s;
    cells += m.n_features();
  }
  return total / static_cast<double>(cells);
}

double fdt(const Predictor& predictor, const TokenSequence& tokens, std::span<const double> map,
           std::size_t label, std::size_t n, const TextMetricOptions& options) {
  const auto top = membership(tokens.size(), top_positions(tokens, map, n));
  TokenSequence out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!top[i]) {
      out.push_back(tokens[i]);
    } else if (options.deletion == DeletionMode::kMask) {
      out.push_back(options.mask_token);
    }
  }
  return score_of(predictor, out, label);
}

double fat(const Predictor& predictor, const TokenSequence& tokens, std::span<const double> map,
           std::size_t label, std::size_t n, const TokenSequence& donor) {
  const auto top = membership(tokens.size(), top_positions(tokens, map, n));
  if (donor.size() < tokens.size()) {
    throw DomainError("donor sequence is shorter than the explained sequence");
  }
  TokenSequence out(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) out[i] = top[i] ? tokens[i] : donor[i];
  return score_of(predictor, out, label);
}

double st(const Predictor& predictor, const TokenSequence& tokens, std::span<const double> map,
          std::size_t label, std::size_t n) {
  const auto top = membership(tokens.size(), top_positions(tokens, map, n));
  TokenSequence out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (top[i]) out.push_back(tokens[i]);
  }
  return score_of(predictor, out, label);
}

RobustText robust_text(const Predictor& predictor, const TokenSequence& tokens,
                       std::span<const double> map, std::size_t label, std::size_t n,
                       const NoiseSpec& spec, std::size_t draws, std::uint64_t seed,
                       const TokenSequence* donor, const TextMetricOptions& options) {
  top_positions(tokens, map, n);
  const auto results = per_draw<RobustText>(tokens, spec, draws, seed, [&](const Input& noisy) {
    const auto& t = std::get<TokenSequence>(noisy);
    RobustText r;
    r.rfdt = fdt(predictor, t, map, label, n, options);
    if (donor) r.rfat = fat(predictor, t, map, label, n, *donor);
    r.rst = st(predictor, t, map, label, n);
    return r;
  });
  RobustText out;
  for (const auto& r : results) {
    out.rfdt += r.rfdt;
    out.rfat += r.rfat;
    out.rst += r.rst;
  }
  const auto d = static_cast<double>(draws);
  out.rfdt /= d;
  out.rfat /= d;
  out.rst /= d;
  return out;
}

double robust_fdt(const Predictor& predictor, const TokenSequence& tokens,
                  std::span<const double> map, std::size_t label, std::size_t n,
                  const NoiseSpec& spec, std::size_t draws, std::uint64_t seed,
                  const TextMetricOptions& options) {
  return robust_text(predictor, tokens, map, label, n, spec, draws, seed, nullptr, options).rfdt;
}

double robust_fat(const Predictor& predictor, const TokenSequence& tokens,
                  std::span<const double> map, std::size_t label, std::size_t n,
                  const TokenSequence& donor, const NoiseSpec& spec, std::size_t draws,
                  std::uint64_t seed) {
  return robust_text(predictor, tokens, map, label, n, spec, draws, seed, &donor).rfat;
}

double robust_st(const Predictor& predictor, const TokenSequence& tokens,
                 std::span<const double> map, std::size_t label, std::size_t n,
                 const NoiseSpec& spec, std::size_t draws, std::uint64_t seed) {
  return robust_text(predictor, tokens, map, label, n, spec, draws, seed).rst;
}

double context_bias_faithfulness(const Segmenter& segmenter, const FeatureVector& input,
                                 std::span<const std::uint8_t> segmentation,
                                 std::span<const std::uint8_t> explanation) {
  const std::size_t f = input.size();
  if (segmentation.size() != f || explanation.size() != f) {
    throw DomainError("masks must match the input's feature count");
  }
  std::size_t region = 0;
  FeatureVector kept(f);
  for (std::size_t j = 0; j < f; ++j) {
    if (segmentation[j]) ++region;
    kept[j] = (segmentation[j] || explanation[j]) ? input[j] : 0.0;
  }
  if (region == 0) throw EmptyMask("segmentation mask selects no feature");

  const auto full = segmenter.segment_scores(input);
  const auto reduced = segmenter.segment_scores(kept);
  if (full.size() != f || reduced.size() != f) {
    throw DomainError("segmenter must return one score per feature");
  }
  double drop = 0.0;
  for (std::size_t j = 0; j < f; ++j) {
    if (segmentation[j]) drop += std::max(0.0, full[j] - reduced[j]);
  }
  return 1.0 - drop / static_cast<double>(region);
}

double robust_context_bias_faithfulness(const Segmenter& segmenter, const FeatureVector& input,
                                        std::span<const std::uint8_t> segmentation,
                                        std::span<const std::uint8_t> explanation,
                                        const NoiseSpec& spec, std::size_t draws,
                                        std::uint64_t seed) {
  const auto values = per_draw<double>(input, spec, draws, seed, [&](const Input& noisy) {
    return context_bias_faithfulness(segmenter, std::get<FeatureVector>(noisy), segmentation,
                                     explanation);
  });
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(draws);
}

void MetricsReport::set(const std::string& name, double value) {
  for (auto& [key, v] : values) {
    if (key == name) {
      v = value;
      return;
    }
  }
  values.emplace_back(name, value);
}

std::optional<double> MetricsReport::get(const std::string& name) const {
  for (const auto& [key, v] : values) {
    if (key == name) return v;
  }
  return std::nullopt;
}

MetricsReport image_metrics(const Predictor& predictor, const FeatureVector& input,
                            std::span<const double> map, std::size_t label,
                            const NoiseSpec& spec, std::size_t draws, std::size_t steps,
                            std::uint64_t seed) {
  MetricsReport report;
  report.noise = spec.describe();
  report.draws = draws;
  report.steps = steps;
  report.seed = seed;
  const double ins = insertion(predictor, input, map, label, steps);
  const double del = deletion(predictor, input, map, label, steps);
  report.set("insertion", ins);
  report.set("deletion", del);
  report.set("overall", overall(ins, del));
  const auto robust = robust_faithfulness(predictor, input, map, label, spec, draws, steps, seed);
  report.set("ri", robust.ri);
  report.set("rd", robust.rd);
  report.set("ro", robust.ro);
  return report;
}

StabilityComparison compare_stability(const Predictor& predictor, const Attributor& attributor,
                                      const Input& input, const NoiseSpec& inner,
                                      const NoiseSpec& outer, std::size_t n,
                                      std::size_t noisy_draws, double alpha, std::uint64_t seed) {
  if (noisy_draws < 2) throw DomainError("stability comparison needs at least 2 noisy inputs");
  const std::size_t f = feature_count(input);
  std::vector<double> smoothed_rows;
  std::vector<double> mean_rows;
  smoothed_rows.reserve(noisy_draws * f);
  mean_rows.reserve(noisy_draws * f);
  StabilityComparison out;
  for (std::size_t d = 0; d < noisy_draws; ++d) {
    RngStream rng(seed, StreamPurpose::kOuterNoise, d);
    const Input noisy = apply_noise(outer, input, rng);
    // Each noisy input gets its own inner seed so the draws stay independent.
    const std::uint64_t inner_seed = rng();
    const auto samples = sample_explanations(predictor, attributor, noisy, inner, n, inner_seed);
    const auto bundle = confidence_bundle(samples, alpha);
    const auto mean = smoothgrad_map(samples);
    smoothed_rows.insert(smoothed_rows.end(), bundle.smoothed.begin(), bundle.smoothed.end());
    mean_rows.insert(mean_rows.end(), mean.begin(), mean.end());
    out.k1 = bundle.indices.k1;
    out.k2 = bundle.indices.k2;
  }
  const SampleMatrix smoothed(noisy_draws, f, std::move(smoothed_rows));
  const SampleMatrix mean(noisy_draws, f, std::move(mean_rows));
  out.mstd_smoothed = mstd(std::span<const SampleMatrix>(&smoothed, 1));
  out.mstd_mean = mstd(std::span<const SampleMatrix>(&mean, 1));
  if (out.mstd_mean > 0.0) out.ratio = out.mstd_smoothed / out.mstd_mean;
  return out;
}

}  // namespace metfa
