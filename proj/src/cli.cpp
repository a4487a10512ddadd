#include "metfa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "metfa/errors.hpp"
#include "metfa/io_formats.hpp"
#include "metfa/map_builder.hpp"
#include "metfa/metrics.hpp"
#include "metfa/sampling.hpp"
#include "metfa/stat_core.hpp"
#include "text_util.hpp"

namespace metfa::cli {
namespace {

std::vector<std::string> read_words(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open input");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    std::istringstream row(line);
    std::string w;
    while (row >> w) words.push_back(w);
  }
  if (words.empty()) throw DomainError(path + ": input is empty");
  return words;
}

FeatureVector read_features(const std::string& path) {
  FeatureVector x;
  for (const auto& w : read_words(path)) x.push_back(detail::parse_double(w, "input value"));
  return x;
}

bool is_token_predictor(const std::string& spec) { return spec.rfind("tokens:", 0) == 0; }

Input read_input(const std::string& path, const std::string& predictor_spec) {
  if (is_token_predictor(predictor_spec)) return read_words(path);
  return read_features(path);
}

// METF (first row), P5 PGM (pixel / 255) or whitespace-separated numbers.
std::vector<double> read_map(const std::string& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "METF")) {
    const auto m = decode_sample_matrix(bytes);
    const auto row = m.row(0);
    return {row.begin(), row.end()};
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    const auto image = decode_pgm(bytes);
    std::vector<double> map(image.pixels.size());
    for (std::size_t j = 0; j < map.size(); ++j) map[j] = image.pixels[j] / 255.0;
    return map;
  }
  return read_features(path);
}

std::optional<SpatialShape> parse_shape(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto x = text.find('x');
  if (x == std::string::npos) throw DomainError("shape must look like WxH");
  const auto w = detail::parse_size(std::string_view(text).substr(0, x), "shape width");
  const auto h = detail::parse_size(std::string_view(text).substr(x + 1), "shape height");
  if (w == 0 || h == 0 || w > 0xffff || h > 0xffff) {
    throw DomainError("shape sides must lie in [1, 65535]");
  }
  return SpatialShape{static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
}

Sided parse_sided(const std::string& text) {
  if (text == "one") return Sided::kOne;
  if (text == "two") return Sided::kTwo;
  throw DomainError("--sided must be 'one' or 'two'");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1), got " + detail::format_double(alpha));
  }
}

struct Seed {
  std::uint64_t value = 0;
  std::vector<const CLI::Option*> flags;  // one per subcommand

  std::uint64_t resolve(const Environment& env) const {
    const bool given = std::any_of(flags.begin(), flags.end(),
                                   [](const CLI::Option* f) { return f->count() > 0; });
    if (!given && env.seed) {
      return detail::parse_size(*env.seed, "METFA_SEED");
    }
    return value;
  }
};

void add_seed(CLI::App* cmd, Seed& seed) {
  seed.flags.push_back(
      cmd->add_option("--seed", seed.value, "Base random seed (default 0, or METFA_SEED)"));
}

struct Options {
  double alpha = 0.05;
  std::string sided = "one";
  std::string predictor;
  std::string attributor;
  std::string input;
  std::string noise = "normal:0.1";
  std::string outer_noise = "normal:0.1";
  std::size_t n = 10;
  std::string out;
  std::string shape;
  bool raw = false;
  std::string samples;
  std::string threshold = "jenks";
  double tie_variance = 1e-6;
  std::string out_map;
  std::string out_report;
  std::string out_smoothed;
  std::string out_lower;
  std::string out_upper;
  std::string floor = "min";
  std::string map;
  std::size_t draws = 10;
  std::size_t steps = 100;
  std::string suite = "image";
  std::optional<std::size_t> label;
  std::size_t top_n = 1;
  std::string donor;
  std::string deletion = "remove";
  std::size_t noisy_draws = 10;
};

// Path map without the outputs that were not requested.
Json paths(std::initializer_list<std::pair<const char*, std::string>> entries) {
  Json j = Json::object();
  for (const auto& [key, path] : entries) {
    if (!path.empty()) j[key] = path;
  }
  return j;
}

void emit_report(const Json& report, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << dump_report(report);
  } else {
    write_report(report, path);
  }
}

int cmd_minsamples(const Options& o, std::ostream& out) {
  check_alpha(o.alpha);
  out << min_samples(o.alpha, parse_sided(o.sided)) << "\n";
  return kExitOk;
}

int cmd_sample(const Options& o, std::uint64_t seed, std::ostream& out) {
  const Input input = read_input(o.input, o.predictor);
  const auto shape = parse_shape(o.shape);
  const auto predictor = make_predictor(o.predictor, feature_count(input));
  const auto attributor = make_attributor(o.attributor, !o.raw);
  const auto noise = NoiseSpec::parse(o.noise);
  if (shape && shape->area() != feature_count(input)) {
    throw DomainError("--shape does not match the input's feature count");
  }
  const auto samples =
      sample_explanations(*predictor, *attributor, input, noise, o.n, seed, shape);
  write_sample_matrix(samples, o.out);

  if (!o.out_report.empty()) {
    RunManifest manifest{"sample"};
    manifest.config = {{"predictor", o.predictor}, {"attributor", o.attributor},
                       {"noise", noise.describe()}, {"n", o.n},
                       {"seed", seed},           {"normalize", !o.raw}};
    manifest.inputs = {{"input", o.input}};
    manifest.outputs = paths({{"samples", o.out}, {"report", o.out_report}});
    write_report(make_report(manifest), o.out_report);
  }
  out << "wrote " << samples.n_samples() << "x" << samples.n_features() << " samples to "
      << o.out << "\n";
  return kExitOk;
}

int cmd_test(const Options& o, std::uint64_t seed, std::ostream& out) {
  check_alpha(o.alpha);
  if (!(o.tie_variance >= 0.0)) throw DomainError("--tie-variance must be >= 0");
  const auto samples = read_sample_matrix(o.samples);
  const bool jenks = o.threshold == "jenks";
  // The threshold is found on the recorded values; only the counts see the
  // tie-break perturbation.
  const double h = jenks ? jenks_break(samples.values())
                         : detail::parse_double(o.threshold, "threshold");
  const bool perturb = !samples.tie_broken() && o.tie_variance > 0.0;
  const auto tested = perturb ? tie_break(samples, o.tie_variance, seed) : samples;
  const auto map = significance_map(tested, h, o.alpha);
  if (!o.out_map.empty()) export_significance(map, samples.shape(), o.out_map);

  RunManifest manifest{"test"};
  manifest.config = {{"alpha", o.alpha},        {"n", samples.n_samples()},
                     {"threshold", o.threshold}, {"h", h},
                     {"tie_variance", perturb ? o.tie_variance : 0.0},
                     {"seed", seed}};
  manifest.inputs = {{"samples", o.samples}};
  manifest.outputs = paths({{"map", o.out_map}, {"report", o.out_report}});
  Json body;
  body["n"] = samples.n_samples();
  body["significance"] = to_json(map);
  emit_report(make_report(manifest, body), o.out_report, out);

  if (!o.out_report.empty()) {
    const auto count = [&](Significance s) { return std::count(map.labels.begin(), map.labels.end(), s); };
    out << "h=" << detail::format_double(h) << " important=" << count(Significance::kImportant)
        << " unimportant=" << count(Significance::kUnimportant)
        << " undecided=" << count(Significance::kUndecided) << "\n";
  }
  return kExitOk;
}

int cmd_smooth(const Options& o, std::ostream& out) {
  check_alpha(o.alpha);
  LowerFloor floor;
  if (o.floor == "min") {
    floor = LowerFloor::kColumnMinimum;
  } else if (o.floor == "zero") {
    floor = LowerFloor::kZero;
  } else {
    throw DomainError("--floor must be 'min' or 'zero'");
  }
  const auto samples = read_sample_matrix(o.samples);
  const auto bundle = confidence_bundle(samples, o.alpha, floor);
  const auto& shape = samples.shape();
  if (!o.out_smoothed.empty()) export_map(bundle.smoothed, shape, o.out_smoothed, MapMode::kGrayscale);
  if (!o.out_lower.empty()) export_map(bundle.lower, shape, o.out_lower, MapMode::kGrayscale);
  if (!o.out_upper.empty()) export_map(bundle.upper, shape, o.out_upper, MapMode::kGrayscale);

  RunManifest manifest{"smooth"};
  manifest.config = {{"alpha", o.alpha}, {"n", samples.n_samples()}, {"floor", o.floor}};
  manifest.inputs = {{"samples", o.samples}};
  manifest.outputs = paths({{"smoothed", o.out_smoothed},
                            {"lower", o.out_lower},
                            {"upper", o.out_upper},
                            {"report", o.out_report}});
  Json body;
  body["bundle"] = to_json(bundle);
  emit_report(make_report(manifest, body), o.out_report, out);
  if (!o.out_report.empty()) {
    out << "k1=" << bundle.indices.k1 << " k2=" << bundle.indices.k2 << "\n";
  }
  return kExitOk;
}

int cmd_metrics(const Options& o, std::uint64_t seed, std::ostream& out) {
  const Input input = read_input(o.input, o.predictor);
  const auto predictor = make_predictor(o.predictor, feature_count(input));
  const auto noise = NoiseSpec::parse(o.noise);
  const auto map = read_map(o.map);
  const std::size_t label = o.label ? *o.label : top_label(*predictor, input);

  MetricsReport report;
  if (o.suite == "image") {
    const auto* x = std::get_if<FeatureVector>(&input);
    if (!x) throw DomainError("the image suite needs a numeric input");
    report = image_metrics(*predictor, *x, map, label, noise, o.draws, o.steps, seed);
  } else if (o.suite == "text") {
    const auto* tokens = std::get_if<TokenSequence>(&input);
    if (!tokens) throw DomainError("the text suite needs a token predictor");
    TextMetricOptions options;
    if (o.deletion == "mask") {
      options.deletion = DeletionMode::kMask;
    } else if (o.deletion != "remove") {
      throw DomainError("--deletion must be 'remove' or 'mask'");
    }
    std::optional<TokenSequence> donor;
    if (!o.donor.empty()) donor = read_words(o.donor);
    report.noise = noise.describe();
    report.draws = o.draws;
    report.seed = seed;
    report.set("fdt", fdt(*predictor, *tokens, map, label, o.top_n, options));
    if (donor) report.set("fat", fat(*predictor, *tokens, map, label, o.top_n, *donor));
    report.set("st", st(*predictor, *tokens, map, label, o.top_n));
    const auto robust = robust_text(*predictor, *tokens, map, label, o.top_n, noise, o.draws,
                                    seed, donor ? &*donor : nullptr, options);
    report.set("rfdt", robust.rfdt);
    if (donor) report.set("rfat", robust.rfat);
    report.set("rst", robust.rst);
  } else {
    throw DomainError("--suite must be 'image' or 'text'");
  }

  RunManifest manifest{"metrics"};
  manifest.config = {{"predictor", o.predictor}, {"suite", o.suite}, {"label", label},
                     {"noise", noise.describe()}, {"draws", o.draws}, {"steps", o.steps},
                     {"seed", seed}};
  if (o.suite == "text") {
    manifest.config["top_n"] = o.top_n;
    manifest.config["deletion"] = o.deletion;
  }
  manifest.inputs = {{"input", o.input}, {"map", o.map}};
  if (!o.donor.empty()) manifest.inputs["donor"] = o.donor;
  manifest.outputs = paths({{"report", o.out_report}});
  emit_report(make_report(manifest, to_json(report)), o.out_report, out);
  if (!o.out_report.empty()) {
    for (const auto& [name, v] : report.values) {
      out << name << "=" << detail::format_double(v) << "\n";
    }
  }
  return kExitOk;
}

int cmd_compare(const Options& o, std::uint64_t seed, std::ostream& out) {
  check_alpha(o.alpha);
  const Input input = read_input(o.input, o.predictor);
  const auto predictor = make_predictor(o.predictor, feature_count(input));
  const auto attributor = make_attributor(o.attributor, !o.raw);
  const auto inner = NoiseSpec::parse(o.noise);
  const auto outer = NoiseSpec::parse(o.outer_noise);
  const auto result = compare_stability(*predictor, *attributor, input, inner, outer, o.n,
                                        o.noisy_draws, o.alpha, seed);

  RunManifest manifest{"compare"};
  manifest.config = {{"predictor", o.predictor},        {"attributor", o.attributor},
                     {"inner_noise", inner.describe()}, {"outer_noise", outer.describe()},
                     {"alpha", o.alpha},                {"n", o.n},
                     {"noisy_draws", o.noisy_draws},    {"seed", seed}};
  manifest.inputs = {{"input", o.input}};
  manifest.outputs = paths({{"report", o.out_report}});
  emit_report(make_report(manifest, {{"comparison", to_json(result)}}), o.out_report, out);
  if (!o.out_report.empty()) {
    out << "ratio="
        << (result.ratio ? detail::format_double(*result.ratio) : std::string("undefined"))
        << "\n";
  }
  return kExitOk;
}

}  // namespace

Environment environment_from_process() {
  Environment env;
  if (const char* s = std::getenv("METFA_SEED")) env.seed = s;
  return env;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env) {
  CLI::App app{"Median-test uncertainty maps for feature attributions", std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Options o;
  Seed seed;

  auto* minsamples = app.add_subcommand("minsamples", "Smallest N for which a test can reject");
  minsamples->add_option("--alpha", o.alpha, "Significance level");
  minsamples->add_option("--sided", o.sided, "one or two");

  auto* sample = app.add_subcommand("sample", "Sample explanations around a noisy input");
  sample->add_option("--predictor", o.predictor, "planted:I,J | planted-linear:I,J | linear:PATH | tokens:PATH")
      ->required();
  sample->add_option("--attributor", o.attributor, "gradient | occlusion | masking[:M[:Q]] | constant:V,... | heavy-tailed[:C]")
      ->required();
  sample->add_option("--input", o.input, "Input file")->required();
  sample->add_option("--noise", o.noise, "Inner noise spec");
  sample->add_option("--n", o.n, "Number of sampled explanations");
  sample->add_option("--out", o.out, "Output METF file")->required();
  sample->add_option("--shape", o.shape, "Spatial shape WxH");
  sample->add_option("--out-report", o.out_report, "Optional JSON manifest");
  sample->add_flag("--raw", o.raw, "Keep unnormalized gradient/occlusion/masking scores");
  add_seed(sample, seed);

  auto* test = app.add_subcommand("test", "Ternary significance map");
  test->add_option("--samples", o.samples, "METF file")->required();
  test->add_option("--alpha", o.alpha, "Significance level");
  test->add_option("--threshold", o.threshold, "Threshold h, or 'jenks'");
  test->add_option("--tie-variance", o.tie_variance, "Variance of the tie-break perturbation");
  test->add_option("--out-map", o.out_map, "Ternary PGM output");
  test->add_option("--out-report", o.out_report, "JSON report output (stdout if absent)");
  add_seed(test, seed);

  auto* smooth = app.add_subcommand("smooth", "Smoothed map and confidence bounds");
  smooth->add_option("--samples", o.samples, "METF file")->required();
  smooth->add_option("--alpha", o.alpha, "Significance level");
  smooth->add_option("--floor", o.floor, "Lower bound when k1 = 0: min or zero");
  smooth->add_option("--out-smoothed", o.out_smoothed, "Grayscale PGM output");
  smooth->add_option("--out-lower", o.out_lower, "Grayscale PGM output");
  smooth->add_option("--out-upper", o.out_upper, "Grayscale PGM output");
  smooth->add_option("--out-report", o.out_report, "JSON report output (stdout if absent)");

  auto* metrics = app.add_subcommand("metrics", "Faithfulness metrics of an attribution map");
  metrics->add_option("--predictor", o.predictor, "Predictor spec")->required();
  metrics->add_option("--input", o.input, "Input file")->required();
  metrics->add_option("--map", o.map, "Map: METF (row 0), PGM or text")->required();
  metrics->add_option("--noise", o.noise, "Outer noise spec for the robust metrics");
  metrics->add_option("--draws", o.draws, "Noise draws for the robust metrics");
  metrics->add_option("--steps", o.steps, "Insertion/deletion steps");
  metrics->add_option("--suite", o.suite, "image or text");
  metrics->add_option("--label", o.label, "Target label (default: top label)");
  metrics->add_option("--top-n", o.top_n, "Tokens kept or removed by the text tests");
  metrics->add_option("--donor", o.donor, "Donor token file for FAT");
  metrics->add_option("--deletion", o.deletion, "remove or mask");
  metrics->add_option("--out-report", o.out_report, "JSON report output (stdout if absent)");
  add_seed(metrics, seed);

  auto* compare = app.add_subcommand("compare", "Stability of the smoothed map vs the plain mean");
  compare->add_option("--predictor", o.predictor, "Predictor spec")->required();
  compare->add_option("--attributor", o.attributor, "Attributor spec")->required();
  compare->add_option("--input", o.input, "Input file")->required();
  compare->add_option("--inner-noise", o.noise, "Inner noise spec");
  compare->add_option("--outer-noise", o.outer_noise, "Outer noise spec");
  compare->add_option("--n", o.n, "Sampled explanations per noisy input");
  compare->add_option("--noisy-draws", o.noisy_draws, "Number of outer-noise inputs");
  compare->add_option("--alpha", o.alpha, "Significance level");
  compare->add_flag("--raw", o.raw, "Keep unnormalized gradient/occlusion/masking scores");
  compare->add_option("--out-report", o.out_report, "JSON report output (stdout if absent)");
  add_seed(compare, seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (minsamples->parsed()) return cmd_minsamples(o, out);
    if (sample->parsed()) return cmd_sample(o, seed.resolve(env), out);
    if (test->parsed()) return cmd_test(o, seed.resolve(env), out);
    if (smooth->parsed()) return cmd_smooth(o, out);
    if (metrics->parsed()) return cmd_metrics(o, seed.resolve(env), out);
    if (compare->parsed()) return cmd_compare(o, seed.resolve(env), out);
  } catch (const InsufficientSamples& e) {
    err << "error: " << e.what() << "\n";
    return kExitInsufficientSamples;
  } catch (const EmptyTrim& e) {
    err << "error: " << e.what() << "\n";
    return kExitInsufficientSamples;
  } catch (const ZeroScore& e) {
    err << "error: " << e.what() << "\n";
    return kExitMetricUndefined;
  } catch (const EmptyMask& e) {
    err << "error: " << e.what() << "\n";
    return kExitMetricUndefined;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace metfa::cli
