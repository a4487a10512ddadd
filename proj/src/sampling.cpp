#include "metfa/sampling.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <random>

#include "annotate.hpp"
#include "metfa/errors.hpp"
#include "text_util.hpp"

namespace metfa {

std::size_t feature_count(const Input& input) {
  return std::visit([](const auto& v) { return v.size(); }, input);
}

SynonymTable::SynonymTable(std::map<std::string, std::vector<std::string>> entries)
    : entries_(std::move(entries)) {}

SynonymTable SynonymTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open synonym table");
  std::map<std::string, std::vector<std::string>> entries;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw FormatError(line_no, path + ": expected 'token<TAB>synonym'");
    }
    entries[line.substr(0, tab)].push_back(line.substr(tab + 1));
  }
  return SynonymTable(std::move(entries));
}

const std::vector<std::string>* SynonymTable::find(const std::string& token) const {
  const auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

struct Validate {
  void operator()(const noise::None&) const {}
  void operator()(const noise::Normal& n) const {
    if (!(n.sigma > 0.0) || !std::isfinite(n.sigma)) {
      throw DomainError("normal noise needs sigma > 0");
    }
  }
  void operator()(const noise::Uniform& u) const {
    if (!(u.lo < u.hi) || !std::isfinite(u.lo) || !std::isfinite(u.hi)) {
      throw DomainError("uniform noise needs lo < hi");
    }
  }
  void operator()(const noise::Brightness& b) const {
    if (!(b.lo > 0.0 && b.lo <= b.hi) || !std::isfinite(b.hi)) {
      throw DomainError("brightness noise needs 0 < lo <= hi");
    }
  }
  void operator()(const noise::TokenSubstitution& t) const {
    if (!(t.p >= 0.0 && t.p <= 1.0)) {
      throw DomainError("substitution probability must lie in [0, 1]");
    }
    if (!t.table) throw DomainError("token substitution needs a synonym table");
  }
};

}  // namespace

NoiseSpec::NoiseSpec(Kind kind) : kind_(std::move(kind)) { std::visit(Validate{}, kind_); }

NoiseSpec NoiseSpec::parse(const std::string& text) {
  using detail::parse_double;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto pair = [&](std::string_view what) {
    const auto parts = detail::split(args, ',');
    if (parts.size() != 2) throw DomainError("noise '" + name + "' expects LO,HI");
    return std::pair{parse_double(parts[0], what), parse_double(parts[1], what)};
  };
  if (name == "none" && args.empty()) return none();
  if (name == "normal") return normal(parse_double(args, "normal sigma"));
  if (name == "uniform") {
    const auto [lo, hi] = pair("uniform bound");
    return uniform(lo, hi);
  }
  if (name == "brightness") {
    const auto [lo, hi] = pair("brightness factor");
    return brightness(lo, hi);
  }
  if (name == "synonym") {
    const auto sep = args.find(':');
    if (sep == std::string::npos) throw DomainError("synonym noise expects P:TABLE_PATH");
    const double p = parse_double(std::string_view(args).substr(0, sep), "substitution p");
    auto table = std::make_shared<const SynonymTable>(SynonymTable::load(args.substr(sep + 1)));
    return token_substitution(p, std::move(table));
  }
  throw DomainError("unknown noise spec '" + text + "'");
}

std::string NoiseSpec::describe() const {
  using detail::format_double;
  struct Describe {
    std::string operator()(const noise::None&) const { return "none"; }
    std::string operator()(const noise::Normal& n) const {
      return "normal:" + format_double(n.sigma);
    }
    std::string operator()(const noise::Uniform& u) const {
      return "uniform:" + format_double(u.lo) + "," + format_double(u.hi);
    }
    std::string operator()(const noise::Brightness& b) const {
      return "brightness:" + format_double(b.lo) + "," + format_double(b.hi);
    }
    std::string operator()(const noise::TokenSubstitution& t) const {
      return "synonym:" + format_double(t.p) + ":<table>";
    }
  };
  return std::visit(Describe{}, kind_);
}

Input apply_noise(const NoiseSpec& spec, const Input& input, RngStream& rng) {
  if (spec.is_none()) return input;

  if (const auto* sub = std::get_if<noise::TokenSubstitution>(&spec.kind())) {
    const auto* tokens = std::get_if<TokenSequence>(&input);
    if (!tokens) throw SpecMismatch("token substitution applied to a feature input");
    TokenSequence out = *tokens;
    std::bernoulli_distribution flip(sub->p);
    for (auto& token : out) {
      if (!flip(rng)) continue;
      const auto* candidates = sub->table->find(token);
      if (!candidates || candidates->empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, candidates->size() - 1);
      token = (*candidates)[pick(rng)];
    }
    return out;
  }

  const auto* features = std::get_if<FeatureVector>(&input);
  if (!features) throw SpecMismatch("numeric noise applied to a token input");
  FeatureVector out = *features;
  if (const auto* n = std::get_if<noise::Normal>(&spec.kind())) {
    std::normal_distribution<double> dist(0.0, n->sigma);
    for (double& x : out) x += dist(rng);
  } else if (const auto* u = std::get_if<noise::Uniform>(&spec.kind())) {
    std::uniform_real_distribution<double> dist(u->lo, u->hi);
    for (double& x : out) x += dist(rng);
  } else if (const auto* b = std::get_if<noise::Brightness>(&spec.kind())) {
    std::uniform_real_distribution<double> dist(b->lo, b->hi);
    const double factor = dist(rng);
    for (double& x : out) x *= factor;
  }
  return out;
}

std::size_t top_label(const Predictor& predictor, const Input& input) {
  const auto scores = predictor.predict(input);
  if (scores.empty()) throw DomainError("predictor returned no label scores");
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

namespace {

std::vector<double> explain_one(const Predictor& predictor, const Attributor& attributor,
                                const Input& input, const NoiseSpec& spec, std::size_t label,
                                std::uint64_t seed, std::size_t index) {
  RngStream rng(seed, StreamPurpose::kSample, index);
  const Input noisy = apply_noise(spec, input, rng);
  auto row = attributor.explain(predictor, noisy, label, rng);
  if (row.size() != feature_count(input)) {
    throw DomainError("attributor returned " + std::to_string(row.size()) + " scores for " +
                      std::to_string(feature_count(input)) + " features");
  }
  return row;
}

SampleMatrix assemble(std::vector<std::vector<double>>& rows, std::optional<SpatialShape> shape) {
  const std::size_t n = rows.size();
  const std::size_t f = rows.front().size();
  std::vector<double> values;
  values.reserve(n * f);
  for (auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return SampleMatrix(n, f, std::move(values), shape);
}

void check_sample_request(const Input& input, std::size_t n) {
  if (n < 1) throw DomainError("need at least one sampled explanation");
  if (feature_count(input) == 0) throw DomainError("input has no features");
}

}  // namespace

SampleMatrix sample_explanations(const Predictor& predictor, const Attributor& attributor,
                                 const Input& input, const NoiseSpec& spec, std::size_t n,
                                 std::uint64_t seed, std::optional<SpatialShape> shape) {
  check_sample_request(input, n);
  const std::size_t label = top_label(predictor, input);
  std::vector<std::vector<double>> rows(n);
  std::vector<std::exception_ptr> failures(n);
  const auto count = static_cast<std::int64_t>(n);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      rows[i] = explain_one(predictor, attributor, input, spec, label, seed,
                            static_cast<std::size_t>(i));
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) detail::rethrow_annotated(failures[i], "sample " + std::to_string(i) + ": ");
  }
  return assemble(rows, shape);
}

SampleMatrix sample_explanations_serial(const Predictor& predictor, const Attributor& attributor,
                                        const Input& input, const NoiseSpec& spec, std::size_t n,
                                        std::uint64_t seed, std::optional<SpatialShape> shape) {
  check_sample_request(input, n);
  const std::size_t label = top_label(predictor, input);
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      rows[i] = explain_one(predictor, attributor, input, spec, label, seed, i);
    } catch (...) {
      detail::rethrow_annotated(std::current_exception(), "sample " + std::to_string(i) + ": ");
    }
  }
  return assemble(rows, shape);
}

}  // namespace metfa
