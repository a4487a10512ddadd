#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "metfa/cli.hpp"
#include "metfa/io_formats.hpp"

using namespace metfa;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, const cli::Environment& env = {}) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, env);
  return {code, out.str(), err.str()};
}

class Workdir {
 public:
  explicit Workdir(const std::string& name)
      : dir_(fs::temp_directory_path() / ("metfa_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string operator()(const std::string& file) const { return (dir_ / file).string(); }
  std::string write(const std::string& file, const std::string& contents) const {
    std::ofstream(dir_ / file) << contents;
    return (*this)(file);
  }

 private:
  fs::path dir_;
};

std::string columns_matrix(const Workdir& wd, const std::string& name,
                           const std::vector<std::vector<double>>& columns,
                           std::optional<SpatialShape> shape = std::nullopt) {
  const std::size_t n = columns.front().size();
  std::vector<double> values(n * columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) values[i * columns.size() + j] = columns[j][i];
  }
  write_sample_matrix(SampleMatrix(n, columns.size(), values, shape), wd(name));
  return wd(name);
}

}  // namespace

TEST_CASE("cli minsamples") {
  CHECK(run({"minsamples", "--alpha", "0.05", "--sided", "one"}).out == "5\n");
  CHECK(run({"minsamples", "--alpha", "0.05", "--sided", "two"}).out == "6\n");
  CHECK(run({"minsamples", "--alpha", "0.5", "--sided", "one"}).out == "1\n");
  const auto bad = run({"minsamples", "--alpha", "1.5"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("alpha") != std::string::npos);
  CHECK(run({"minsamples", "--sided", "three"}).code == cli::kExitUsage);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"bogus"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("cli sample") {
  Workdir wd("sample");
  const auto input = wd.write("x.txt", "0.1 0.9\n0.8 0.2\n");
  auto r = run({"sample", "--predictor", "planted:1,2", "--attributor", "constant:0.1,0.2,0.3,0.4",
                "--input", input, "--n", "6", "--out", wd("c.metf"), "--shape", "2x2"});
  REQUIRE(r.code == 0);
  const auto constant = read_sample_matrix(wd("c.metf"));
  CHECK(constant.n_samples() == 6);
  CHECK(constant.shape() == SpatialShape{2, 2});
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(constant.at(i, 3) == static_cast<double>(0.4f));
  }

  r = run({"sample", "--predictor", "planted:1,2", "--attributor", "occlusion", "--input", input,
           "--n", "1", "--noise", "none", "--out", wd("o.metf")});
  REQUIRE(r.code == 0);
  PlantedPredictor planted(4, {1, 2});
  RngStream rng(0, StreamPurpose::kSample, 0);
  const auto clean = OcclusionAttributor().explain(planted, FeatureVector{0.1, 0.9, 0.8, 0.2}, 1, rng);
  const auto occluded = read_sample_matrix(wd("o.metf"));
  const auto row = occluded.row(0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(row[j] == static_cast<double>(static_cast<float>(clean[j])));

  const std::vector<std::string> replay{"sample", "--predictor", "planted:1,2", "--attributor",
                                        "masking:20", "--input", input, "--n", "8", "--seed", "5",
                                        "--out", wd("a.metf")};
  REQUIRE(run(replay).code == 0);
  auto second = replay;
  second.back() = wd("b.metf");
  REQUIRE(run(second).code == 0);
  CHECK(read_file(wd("a.metf")) == read_file(wd("b.metf")));

  CHECK(run({"sample", "--predictor", "planted:1", "--attributor", "lime", "--input", input,
             "--out", wd("z.metf")})
            .code == cli::kExitUsage);
  CHECK(run({"sample", "--predictor", "planted:1", "--attributor", "occlusion", "--input",
             wd("missing.txt"), "--out", wd("z.metf")})
            .code == cli::kExitUsage);
}

TEST_CASE("cli seed from the environment") {
  Workdir wd("seed");
  const auto input = wd.write("x.txt", "0.1 0.9 0.8 0.2");
  const std::vector<std::string> base{"sample", "--predictor", "planted:1,2", "--attributor",
                                      "masking:20", "--input", input, "--n", "4"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("--out");
    args.push_back(wd(out));
    return args;
  };
  cli::Environment env{"5"};
  REQUIRE(run(with({}, "env.metf"), env).code == 0);
  REQUIRE(run(with({"--seed", "5"}, "flag.metf")).code == 0);
  REQUIRE(run(with({"--seed", "6"}, "override.metf"), env).code == 0);
  CHECK(read_file(wd("env.metf")) == read_file(wd("flag.metf")));
  CHECK(read_file(wd("env.metf")) != read_file(wd("override.metf")));
  CHECK(run(with({}, "bad.metf"), cli::Environment{"abc"}).code == cli::kExitUsage);
}

TEST_CASE("cli test") {
  Workdir wd("test");
  const auto samples = columns_matrix(wd, "ab.metf", {std::vector<double>(10, 0.9),
                                                      std::vector<double>(10, 0.1)},
                                      SpatialShape{2, 1});
  auto r = run({"test", "--samples", samples, "--threshold", "0.5", "--out-map", wd("m.pgm"),
                "--out-report", wd("r.json")});
  REQUIRE(r.code == 0);
  const auto report = read_report(wd("r.json"));
  CHECK(report["significance"]["labels"] == Json::array({1, -1}));
  CHECK(report["manifest"]["subcommand"] == "test");
  CHECK(read_pgm(wd("m.pgm")).pixels == std::vector<std::uint8_t>{255, 0});

  std::vector<double> pooled{1, 1, 2, 8, 9, 9};
  const auto jenks = columns_matrix(wd, "j.metf", {pooled});
  r = run({"test", "--samples", jenks, "--threshold", "jenks", "--out-report", wd("j.json")});
  REQUIRE(r.code == 0);
  CHECK(read_report(wd("j.json"))["manifest"]["config"]["h"].get<double>() == 5.0);

  const auto four = columns_matrix(wd, "four.metf", {std::vector<double>(4, 0.9)});
  r = run({"test", "--samples", four, "--threshold", "0.5"});
  CHECK(r.code == cli::kExitInsufficientSamples);
  CHECK(r.err.find("samples") != std::string::npos);

  const auto flat = columns_matrix(wd, "flat.metf", {std::vector<double>(6, 0.9)});
  CHECK(run({"test", "--samples", flat}).code == cli::kExitUsage);  // jenks undefined
  CHECK(run({"test", "--samples", samples, "--alpha", "2"}).code == cli::kExitUsage);
}

TEST_CASE("cli test report is reproducible") {
  Workdir wd("test_replay");
  std::vector<double> a{0, 1, 0, 1, 1, 1, 0, 1, 1, 1}, b{0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  const auto samples = columns_matrix(wd, "s.metf", {a, b});
  REQUIRE(run({"test", "--samples", samples, "--seed", "3", "--out-report", wd("1.json")}).code == 0);
  REQUIRE(run({"test", "--samples", samples, "--seed", "3", "--out-report", wd("2.json")}).code == 0);
  auto one = read_file(wd("1.json")), two = read_file(wd("2.json"));
  // Reports differ only in the report path they record.
  auto text1 = std::string(one.begin(), one.end()), text2 = std::string(two.begin(), two.end());
  text1.replace(text1.find("1.json"), 6, "X.json");
  text2.replace(text2.find("2.json"), 6, "X.json");
  CHECK(text1 == text2);
}

TEST_CASE("cli smooth") {
  Workdir wd("smooth");
  std::vector<double> stairs;
  for (int i = 0; i < 10; ++i) stairs.push_back(i / 10.0);
  const auto samples = columns_matrix(wd, "s.metf", {stairs, std::vector<double>(10, 0.25)},
                                      SpatialShape{1, 2});
  const auto r = run({"smooth", "--samples", samples, "--out-smoothed", wd("s.pgm"), "--out-lower",
                      wd("l.pgm"), "--out-upper", wd("u.pgm"), "--out-report", wd("r.json")});
  REQUIRE(r.code == 0);
  const auto report = read_report(wd("r.json"));
  const auto& bundle = report["bundle"];
  CHECK(bundle["k1"] == 1);
  CHECK(bundle["k2"] == 9);
  CHECK(bundle["smoothed"][0].get<double>() == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(bundle["lower"][0].get<double>() == 0.0);
  CHECK(bundle["upper"][0].get<double>() == static_cast<double>(0.8f));
  CHECK(bundle["smoothed"][1].get<double>() == 0.25);
  CHECK(read_pgm(wd("l.pgm")).pixels[1] == read_pgm(wd("u.pgm")).pixels[1]);
  CHECK(read_pgm(wd("s.pgm")).pixels[1] == read_pgm(wd("u.pgm")).pixels[1]);

  const auto five = columns_matrix(wd, "five.metf", {std::vector<double>(5, 0.5)});
  CHECK(run({"smooth", "--samples", five}).code == cli::kExitInsufficientSamples);
  const auto noshape = columns_matrix(wd, "ns.metf", {stairs});
  CHECK(run({"smooth", "--samples", noshape, "--out-smoothed", wd("x.pgm")}).code ==
        cli::kExitUsage);
}

TEST_CASE("cli metrics") {
  Workdir wd("metrics");
  const auto input = wd.write("x.txt", "1 1 1 1");
  const auto map = wd.write("map.txt", "1 1 0 0");
  auto r = run({"metrics", "--predictor", "planted-linear:0,1", "--input", input, "--map", map,
                "--steps", "4", "--noise", "none", "--out-report", wd("r.json")});
  REQUIRE(r.code == 0);
  auto report = read_report(wd("r.json"));
  CHECK(report["metrics"]["insertion"].get<double>() == 0.7);
  CHECK(report["metrics"]["deletion"].get<double>() == 0.3);
  CHECK(std::abs(report["metrics"]["ri"].get<double>() - 0.7) <= 1e-12);
  CHECK(report["manifest"]["config"]["noise"] == "none");

  // Same map given as a PGM and as a METF file.
  export_map(std::vector<double>{1, 1, 0, 0}, SpatialShape{2, 2}, wd("map.pgm"), MapMode::kGrayscale);
  write_sample_matrix(SampleMatrix(1, 4, {1, 1, 0, 0}), wd("map.metf"));
  for (const auto& m : {wd("map.pgm"), wd("map.metf")}) {
    r = run({"metrics", "--predictor", "planted-linear:0,1", "--input", input, "--map", m,
             "--steps", "4", "--noise", "none", "--out-report", wd("m.json")});
    REQUIRE(r.code == 0);
    CHECK(read_report(wd("m.json"))["metrics"]["insertion"].get<double>() == 0.7);
  }

  const auto zeros = wd.write("zeros.txt", "0 0 0 0");
  r = run({"metrics", "--predictor", "planted-linear:0,1", "--input", zeros, "--map", map,
           "--label", "1"});
  CHECK(r.code == cli::kExitMetricUndefined);
  CHECK(run({"metrics", "--predictor", "planted-linear:0,1", "--input", input, "--map", map,
             "--suite", "audio"})
            .code == cli::kExitUsage);
}

TEST_CASE("cli text metrics") {
  Workdir wd("text");
  const auto weights = wd.write("w.tsv", "bad\t5\n");
  const auto text = wd.write("t.txt", "bad movie tonight");
  const auto map = wd.write("m.txt", "0.9 0.1 0.2");
  const auto donor = wd.write("d.txt", "good good good");
  const auto r = run({"metrics", "--suite", "text", "--predictor", "tokens:" + weights, "--input",
                      text, "--map", map, "--noise", "none", "--top-n", "1", "--donor", donor,
                      "--out-report", wd("r.json")});
  REQUIRE(r.code == 0);
  const auto report = read_report(wd("r.json"));
  CHECK(report["metrics"]["fdt"].get<double>() == doctest::Approx(0.5));
  CHECK(report["metrics"]["st"].get<double>() == doctest::Approx(0.993307).epsilon(1e-6));
  CHECK(report["metrics"]["rfdt"].get<double>() == doctest::Approx(0.5));
  CHECK(report["metrics"].contains("fat"));
}

TEST_CASE("cli compare") {
  Workdir wd("compare");
  const auto input = wd.write("x.txt", "0.9 0.8 0.1 0.2");
  auto r = run({"compare", "--predictor", "planted:0,1", "--attributor", "constant:0.1,0.2,0.3,0.4",
                "--input", input, "--n", "10", "--noisy-draws", "4", "--out-report", wd("c.json")});
  REQUIRE(r.code == 0);
  CHECK(read_report(wd("c.json"))["comparison"]["ratio"] == "undefined");

  const std::vector<std::string> heavy{"compare", "--predictor", "planted:0,1", "--attributor",
                                       "heavy-tailed", "--input", input, "--n", "30",
                                       "--noisy-draws", "6", "--seed", "2"};
  r = run(heavy);
  REQUIRE(r.code == 0);
  const auto again = run(heavy);
  CHECK(r.out == again.out);
  const auto parsed = Json::parse(r.out);
  CHECK(parsed["comparison"]["ratio"].get<double>() < 1.0);
}

TEST_CASE("cli binary exit codes") {
  const std::string cli = METFA_CLI_PATH;
  auto status = [](const std::string& command) {
    const int raw = std::system((command + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(cli + " minsamples --alpha 0.05") == 0);
  CHECK(status(cli + " minsamples --alpha 0") == 2);
  CHECK(status(cli + " nonsense") == 2);
}
