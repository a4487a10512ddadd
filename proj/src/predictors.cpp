#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "metfa/errors.hpp"
#include "metfa/sampling.hpp"
#include "text_util.hpp"

namespace metfa {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

const FeatureVector& features_of(const Input& input, std::size_t expected) {
  const auto* x = std::get_if<FeatureVector>(&input);
  if (!x) throw DomainError("predictor expects a feature vector, got tokens");
  if (x->size() != expected) {
    throw DomainError("predictor expects " + std::to_string(expected) + " features, got " +
                      std::to_string(x->size()));
  }
  return *x;
}

}  // namespace

LinearSoftmaxPredictor::LinearSoftmaxPredictor(std::size_t n_labels, std::size_t n_features,
                                               std::vector<double> weights)
    : n_labels_(n_labels), n_features_(n_features), weights_(std::move(weights)) {
  if (n_labels_ == 0 || n_features_ == 0) throw DomainError("empty linear predictor");
  if (weights_.size() != n_labels_ * n_features_) {
    throw DomainError("linear predictor weight count does not match its shape");
  }
}

LinearSoftmaxPredictor LinearSoftmaxPredictor::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open weight file");
  std::string line;
  std::uint64_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw FormatError(0, path + ": empty weight file");
  std::istringstream header(line);
  std::string tag;
  std::size_t labels = 0, features = 0;
  if (!(header >> tag >> labels >> features) || tag != "P" || labels == 0 || features == 0) {
    throw FormatError(line_no, path + ": header must be 'P <n_labels> <n_features>'");
  }
  std::string extra;
  if (header >> extra) throw FormatError(line_no, path + ": trailing data after header");

  std::vector<double> weights;
  weights.reserve(labels * features);
  for (std::size_t c = 0; c < labels; ++c) {
    if (!next_line()) throw FormatError(line_no + 1, path + ": missing weight row");
    std::istringstream row(line);
    std::string token;
    std::size_t count = 0;
    while (row >> token) {
      double w;
      try {
        w = detail::parse_double(token, "weight");
      } catch (const DomainError&) {
        throw FormatError(line_no, path + ": bad weight '" + token + "'");
      }
      if (!std::isfinite(w)) throw FormatError(line_no, path + ": non-finite weight");
      weights.push_back(w);
      ++count;
    }
    if (count != features) {
      throw FormatError(line_no, path + ": expected " + std::to_string(features) + " weights");
    }
  }
  if (next_line()) throw FormatError(line_no, path + ": unexpected extra row");
  return LinearSoftmaxPredictor(labels, features, std::move(weights));
}

std::vector<double> LinearSoftmaxPredictor::predict(const Input& input) const {
  const auto& x = features_of(input, n_features_);
  std::vector<double> logits(n_labels_, 0.0);
  for (std::size_t c = 0; c < n_labels_; ++c) {
    for (std::size_t j = 0; j < n_features_; ++j) logits[c] += weights_[c * n_features_ + j] * x[j];
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    total += z;
  }
  for (double& z : logits) z /= total;
  return logits;
}

FeatureVector LinearSoftmaxPredictor::gradient(const FeatureVector& input,
                                               std::size_t label) const {
  features_of(input, n_features_);
  if (label >= n_labels_) throw DomainError("label out of range");
  const auto* row = weights_.data() + label * n_features_;
  return FeatureVector(row, row + n_features_);
}

PlantedPredictor::PlantedPredictor(std::size_t n_features, std::vector<std::size_t> planted,
                                   Link link)
    : n_features_(n_features), planted_(std::move(planted)), link_(link) {
  if (planted_.empty()) throw DomainError("planted predictor needs at least one planted feature");
  for (auto j : planted_) {
    if (j >= n_features_) throw DomainError("planted feature index out of range");
  }
}

double PlantedPredictor::planted_mean(const FeatureVector& x) const {
  double sum = 0.0;
  for (auto j : planted_) sum += x[j];
  return sum / static_cast<double>(planted_.size());
}

std::vector<double> PlantedPredictor::predict(const Input& input) const {
  const auto& x = features_of(input, n_features_);
  const double m = planted_mean(x);
  const double s = link_ == Link::kSigmoid ? sigmoid(m) : m;
  return {1.0 - s, s};
}

FeatureVector PlantedPredictor::gradient(const FeatureVector& input, std::size_t label) const {
  features_of(input, n_features_);
  if (label >= 2) throw DomainError("label out of range");
  double slope = 1.0;
  if (link_ == Link::kSigmoid) {
    const double s = sigmoid(planted_mean(input));
    slope = s * (1.0 - s);
  }
  slope /= static_cast<double>(planted_.size());
  if (label == 0) slope = -slope;
  FeatureVector grad(n_features_, 0.0);
  for (auto j : planted_) grad[j] += slope;
  return grad;
}

TokenCountPredictor::TokenCountPredictor(std::map<std::string, double> weights)
    : weights_(std::move(weights)) {}

TokenCountPredictor TokenCountPredictor::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open token weight file");
  std::map<std::string, double> weights;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(line_no, path + ": expected 'token<TAB>weight'");
    }
    double w;
    try {
      w = detail::parse_double(std::string_view(line).substr(tab + 1), "token weight");
    } catch (const DomainError&) {
      throw FormatError(line_no, path + ": bad token weight");
    }
    weights[line.substr(0, tab)] = w;
  }
  return TokenCountPredictor(std::move(weights));
}

std::vector<double> TokenCountPredictor::predict(const Input& input) const {
  const auto* tokens = std::get_if<TokenSequence>(&input);
  if (!tokens) throw DomainError("token predictor expects a token sequence");
  double z = 0.0;
  for (const auto& t : *tokens) {
    const auto it = weights_.find(t);
    if (it != weights_.end()) z += it->second;
  }
  const double s = sigmoid(z);
  return {1.0 - s, s};
}

std::unique_ptr<Predictor> make_predictor(const std::string& spec, std::size_t n_features) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "planted" || name == "planted-linear") {
    if (args.empty()) throw DomainError("planted predictor expects feature indices");
    std::vector<std::size_t> planted;
    for (const auto& part : detail::split(args, ',')) {
      planted.push_back(detail::parse_size(part, "planted index"));
    }
    const Link link = name == "planted" ? Link::kSigmoid : Link::kIdentity;
    return std::make_unique<PlantedPredictor>(n_features, std::move(planted), link);
  }
  if (name == "linear") {
    return std::make_unique<LinearSoftmaxPredictor>(LinearSoftmaxPredictor::load(args));
  }
  if (name == "tokens") {
    return std::make_unique<TokenCountPredictor>(TokenCountPredictor::load(args));
  }
  throw DomainError("unknown predictor '" + spec + "'");
}

}  // namespace metfa
