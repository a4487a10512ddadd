#ifndef METFA_SAMPLING_HPP
#define METFA_SAMPLING_HPP

// Noise distributions, the predictor/attributor interfaces with their
// reference implementations, and the explanation sampler.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "metfa/rng.hpp"
#include "metfa/sample_matrix.hpp"

namespace metfa {

using FeatureVector = std::vector<double>;
using TokenSequence = std::vector<std::string>;
using Input = std::variant<FeatureVector, TokenSequence>;

std::size_t feature_count(const Input& input);

// token -> candidate synonyms. Text format: one "token<TAB>synonym" per line;
// repeated tokens accumulate candidates.
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(std::map<std::string, std::vector<std::string>> entries);

  static SynonymTable load(const std::string& path);

  const std::vector<std::string>* find(const std::string& token) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

namespace noise {
struct None {};
struct Normal {
  double sigma = 0.1;
};
struct Uniform {
  double lo = -0.1;
  double hi = 0.1;
};
struct Brightness {
  double lo = 0.9;
  double hi = 1.1;
};
struct TokenSubstitution {
  double p = 0.5;
  std::shared_ptr<const SynonymTable> table;
};
}  // namespace noise

// A perturbation distribution for inputs.
class NoiseSpec {
 public:
  using Kind = std::variant<noise::None, noise::Normal, noise::Uniform, noise::Brightness,
                            noise::TokenSubstitution>;

  // Throws DomainError when the parameters violate the kind's invariants.
  explicit NoiseSpec(Kind kind);

  static NoiseSpec none() { return NoiseSpec(noise::None{}); }
  static NoiseSpec normal(double sigma) { return NoiseSpec(noise::Normal{sigma}); }
  static NoiseSpec uniform(double lo, double hi) { return NoiseSpec(noise::Uniform{lo, hi}); }
  static NoiseSpec brightness(double lo, double hi) {
    return NoiseSpec(noise::Brightness{lo, hi});
  }
  static NoiseSpec token_substitution(double p, std::shared_ptr<const SynonymTable> table) {
    return NoiseSpec(noise::TokenSubstitution{p, std::move(table)});
  }

  // Parses "none", "normal:SIGMA", "uniform:LO,HI", "brightness:LO,HI" or
  // "synonym:P:TABLE_PATH".
  static NoiseSpec parse(const std::string& text);

  const Kind& kind() const { return kind_; }
  bool is_none() const { return std::holds_alternative<noise::None>(kind_); }

  // Canonical text form, parseable by parse() (synonym tables print as "<table>").
  std::string describe() const;

 private:
  Kind kind_;
};

// Additive normal/uniform noise i.i.d. per feature, one multiplicative
// brightness factor per input, Bernoulli(p) synonym replacement per token.
// Throws SpecMismatch when the noise kind does not fit the input kind.
Input apply_noise(const NoiseSpec& spec, const Input& input, RngStream& rng);

// Model under explanation. Implementations must be deterministic and safe
// for concurrent const use.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<double> predict(const Input& input) const = 0;
  virtual std::size_t n_labels() const = 0;
};

// Predictor with an exact input gradient of its per-label score function.
class DifferentiablePredictor : public Predictor {
 public:
  virtual FeatureVector gradient(const FeatureVector& input, std::size_t label) const = 0;
};

std::size_t top_label(const Predictor& predictor, const Input& input);

// softmax(W x). Weight file: first line "P <n_labels> <n_features>", then one
// whitespace-separated row of reals per label. The gradient is that of the
// label's logit, i.e. the weight row.
class LinearSoftmaxPredictor : public DifferentiablePredictor {
 public:
  LinearSoftmaxPredictor(std::size_t n_labels, std::size_t n_features,
                         std::vector<double> weights);

  static LinearSoftmaxPredictor load(const std::string& path);

  std::vector<double> predict(const Input& input) const override;
  std::size_t n_labels() const override { return n_labels_; }
  FeatureVector gradient(const FeatureVector& input, std::size_t label) const override;

 private:
  std::size_t n_labels_;
  std::size_t n_features_;
  std::vector<double> weights_;  // label-major
};

enum class Link { kIdentity, kSigmoid };

// Label 1 scores link(mean of the planted features); label 0 scores 1 minus
// that. Ground truth for the metric oracles.
class PlantedPredictor : public DifferentiablePredictor {
 public:
  PlantedPredictor(std::size_t n_features, std::vector<std::size_t> planted,
                   Link link = Link::kSigmoid);

  std::vector<double> predict(const Input& input) const override;
  std::size_t n_labels() const override { return 2; }
  FeatureVector gradient(const FeatureVector& input, std::size_t label) const override;

  const std::vector<std::size_t>& planted() const { return planted_; }

 private:
  double planted_mean(const FeatureVector& x) const;

  std::size_t n_features_;
  std::vector<std::size_t> planted_;
  Link link_;
};

// Label 1 scores sigmoid(sum of the weights of the tokens present, counted
// with multiplicity); label 0 scores 1 minus that. Weight file: one
// "token<TAB>weight" per line.
class TokenCountPredictor : public Predictor {
 public:
  explicit TokenCountPredictor(std::map<std::string, double> weights);

  static TokenCountPredictor load(const std::string& path);

  std::vector<double> predict(const Input& input) const override;
  std::size_t n_labels() const override { return 2; }

 private:
  std::map<std::string, double> weights_;
};

// Explanation algorithm. Implementations must be safe for concurrent const
// use; all randomness comes from the supplied stream.
class Attributor {
 public:
  virtual ~Attributor() = default;
  virtual std::vector<double> explain(const Predictor& predictor, const Input& input,
                                      std::size_t label, RngStream& rng) const = 0;
};

// Random binary masks keep each feature with probability keep_prob; the
// score of feature j is the mean target score over masks that keep j (0 if
// no mask keeps it). Dropped features are zeroed, dropped tokens removed.
class RandomMaskingAttributor : public Attributor {
 public:
  explicit RandomMaskingAttributor(std::size_t masks = 200, double keep_prob = 0.5,
                                   bool normalize = true);
  std::vector<double> explain(const Predictor& predictor, const Input& input, std::size_t label,
                              RngStream& rng) const override;

 private:
  std::size_t masks_;
  double keep_prob_;
  bool normalize_;
};

// Score drop when feature j alone is zeroed (token j removed).
class OcclusionAttributor : public Attributor {
 public:
  explicit OcclusionAttributor(bool normalize = true) : normalize_(normalize) {}
  std::vector<double> explain(const Predictor& predictor, const Input& input, std::size_t label,
                              RngStream& rng) const override;

 private:
  bool normalize_;
};

// |gradient| of a DifferentiablePredictor. Throws DomainError for any other
// predictor or for token input.
class GradientAttributor : public Attributor {
 public:
  explicit GradientAttributor(bool normalize = true) : normalize_(normalize) {}
  std::vector<double> explain(const Predictor& predictor, const Input& input, std::size_t label,
                              RngStream& rng) const override;

 private:
  bool normalize_;
};

// Returns the same map whatever the input.
class ConstantAttributor : public Attributor {
 public:
  explicit ConstantAttributor(std::vector<double> map) : map_(std::move(map)) {}
  std::vector<double> explain(const Predictor& predictor, const Input& input, std::size_t label,
                              RngStream& rng) const override;

 private:
  std::vector<double> map_;
};

// Synthetic unstable explainer: the clamped input value plus N(0, jitter^2),
// except that with probability `contamination` an entry instead receives a
// Cauchy(0, outlier_scale) gross error.
class HeavyTailedAttributor : public Attributor {
 public:
  HeavyTailedAttributor(double contamination = 0.1, double jitter = 0.05,
                        double outlier_scale = 1.0);
  std::vector<double> explain(const Predictor& predictor, const Input& input, std::size_t label,
                              RngStream& rng) const override;

 private:
  double contamination_;
  double jitter_;
  double outlier_scale_;
};

// Builds "NAME[:ARGS]" attributors for the command line: gradient,
// occlusion, masking[:M[:Q]], constant:V1,V2,..., heavy-tailed[:C].
// `normalize` applies to the attributors with unbounded raw scores
// (gradient, occlusion, masking).
std::unique_ptr<Attributor> make_attributor(const std::string& spec, bool normalize = true);

// Builds "planted:I,J,...", "planted-linear:I,J,...", "linear:WEIGHTS_PATH"
// or "tokens:WEIGHTS_PATH" predictors; n_features sizes the planted kinds.
std::unique_ptr<Predictor> make_predictor(const std::string& spec, std::size_t n_features);

// Row i is the attribution of input + noise drawn from stream (seed, i),
// explained for the clean input's top label. Rows are computed in parallel
// and assembled in index order.
SampleMatrix sample_explanations(const Predictor& predictor, const Attributor& attributor,
                                 const Input& input, const NoiseSpec& spec, std::size_t n,
                                 std::uint64_t seed,
                                 std::optional<SpatialShape> shape = std::nullopt);

// Sequential reference of sample_explanations.
SampleMatrix sample_explanations_serial(const Predictor& predictor, const Attributor& attributor,
                                        const Input& input, const NoiseSpec& spec, std::size_t n,
                                        std::uint64_t seed,
                                        std::optional<SpatialShape> shape = std::nullopt);

}  // namespace metfa

#endif  // METFA_SAMPLING_HPP
