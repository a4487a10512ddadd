#include <algorithm>
#include <cmath>
#include <random>

#include "metfa/errors.hpp"
#include "metfa/sampling.hpp"
#include "text_util.hpp"

namespace metfa {
namespace {

double target_score(const Predictor& predictor, const Input& input, std::size_t label) {
  const auto scores = predictor.predict(input);
  if (label >= scores.size()) throw DomainError("target label out of range");
  return scores[label];
}

// Keeps the features whose flag is set; dropped features become 0, dropped
// tokens are removed.
Input masked(const Input& input, const std::vector<char>& keep) {
  if (const auto* x = std::get_if<FeatureVector>(&input)) {
    FeatureVector out(x->size());
    for (std::size_t j = 0; j < x->size(); ++j) out[j] = keep[j] ? (*x)[j] : 0.0;
    return out;
  }
  const auto& tokens = std::get<TokenSequence>(input);
  TokenSequence out;
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (keep[j]) out.push_back(tokens[j]);
  }
  return out;
}

std::vector<double> finish(std::vector<double> raw, bool normalize) {
  return normalize ? min_max_normalize(raw) : raw;
}

}  // namespace

RandomMaskingAttributor::RandomMaskingAttributor(std::size_t masks, double keep_prob,
                                                 bool normalize)
    : masks_(masks), keep_prob_(keep_prob), normalize_(normalize) {
  if (masks_ < 1) throw DomainError("random masking needs at least one mask");
  if (!(keep_prob_ >= 0.0 && keep_prob_ <= 1.0)) {
    throw DomainError("keep probability must lie in [0, 1]");
  }
}

std::vector<double> RandomMaskingAttributor::explain(const Predictor& predictor,
                                                     const Input& input, std::size_t label,
                                                     RngStream& rng) const {
  const std::size_t f = feature_count(input);
  std::vector<double> sum(f, 0.0);
  std::vector<std::size_t> kept(f, 0);
  std::vector<char> keep(f);
  std::bernoulli_distribution coin(keep_prob_);
  for (std::size_t m = 0; m < masks_; ++m) {
    for (std::size_t j = 0; j < f; ++j) keep[j] = coin(rng) ? 1 : 0;
    const double score = target_score(predictor, masked(input, keep), label);
    for (std::size_t j = 0; j < f; ++j) {
      if (keep[j]) {
        sum[j] += score;
        ++kept[j];
      }
    }
  }
  std::vector<double> raw(f, 0.0);
  for (std::size_t j = 0; j < f; ++j) {
    if (kept[j] > 0) raw[j] = sum[j] / static_cast<double>(kept[j]);
  }
  return finish(std::move(raw), normalize_);
}

std::vector<double> OcclusionAttributor::explain(const Predictor& predictor, const Input& input,
                                                 std::size_t label, RngStream&) const {
  const std::size_t f = feature_count(input);
  const double base = target_score(predictor, input, label);
  std::vector<char> keep(f, 1);
  std::vector<double> raw(f);
  for (std::size_t j = 0; j < f; ++j) {
    keep[j] = 0;
    raw[j] = base - target_score(predictor, masked(input, keep), label);
    keep[j] = 1;
  }
  return finish(std::move(raw), normalize_);
}

std::vector<double> GradientAttributor::explain(const Predictor& predictor, const Input& input,
                                                std::size_t label, RngStream&) const {
  const auto* model = dynamic_cast<const DifferentiablePredictor*>(&predictor);
  if (!model) throw DomainError("gradient attribution needs a differentiable predictor");
  const auto* x = std::get_if<FeatureVector>(&input);
  if (!x) throw DomainError("gradient attribution needs a feature input");
  auto grad = model->gradient(*x, label);
  for (double& g : grad) g = std::abs(g);
  return finish(std::move(grad), normalize_);
}

std::vector<double> ConstantAttributor::explain(const Predictor&, const Input&, std::size_t,
                                                RngStream&) const {
  return map_;
}

HeavyTailedAttributor::HeavyTailedAttributor(double contamination, double jitter,
                                             double outlier_scale)
    : contamination_(contamination), jitter_(jitter), outlier_scale_(outlier_scale) {
  if (!(contamination_ >= 0.0 && contamination_ <= 1.0)) {
    throw DomainError("contamination must lie in [0, 1]");
  }
  if (!(jitter_ > 0.0) || !(outlier_scale_ > 0.0)) {
    throw DomainError("jitter and outlier scale must be positive");
  }
}

std::vector<double> HeavyTailedAttributor::explain(const Predictor&, const Input& input,
                                                   std::size_t, RngStream& rng) const {
  const std::size_t f = feature_count(input);
  const auto* x = std::get_if<FeatureVector>(&input);
  std::bernoulli_distribution gross(contamination_);
  std::normal_distribution<double> jitter(0.0, jitter_);
  std::cauchy_distribution<double> outlier(0.0, outlier_scale_);
  std::vector<double> out(f);
  for (std::size_t j = 0; j < f; ++j) {
    const double base = x ? std::clamp((*x)[j], 0.0, 1.0) : 0.5;
    out[j] = base + (gross(rng) ? outlier(rng) : jitter(rng));
  }
  return out;
}

std::unique_ptr<Attributor> make_attributor(const std::string& spec, bool normalize) {
  const auto parts = detail::split(spec, ':');
  const std::string& name = parts.front();
  if (name == "gradient" && parts.size() == 1) return std::make_unique<GradientAttributor>(normalize);
  if (name == "occlusion" && parts.size() == 1) return std::make_unique<OcclusionAttributor>(normalize);
  if (name == "masking" && parts.size() <= 3) {
    const std::size_t masks = parts.size() > 1 ? detail::parse_size(parts[1], "mask count") : 200;
    const double q = parts.size() > 2 ? detail::parse_double(parts[2], "keep probability") : 0.5;
    return std::make_unique<RandomMaskingAttributor>(masks, q, normalize);
  }
  if (name == "constant" && parts.size() == 2) {
    std::vector<double> map;
    for (const auto& v : detail::split(parts[1], ',')) {
      map.push_back(detail::parse_double(v, "constant map value"));
    }
    return std::make_unique<ConstantAttributor>(std::move(map));
  }
  if (name == "heavy-tailed" && parts.size() <= 2) {
    const double c = parts.size() > 1 ? detail::parse_double(parts[1], "contamination") : 0.1;
    return std::make_unique<HeavyTailedAttributor>(c);
  }
  throw DomainError("unknown attributor '" + spec + "'");
}

}  // namespace metfa
