#include "metfa/io_formats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "metfa/errors.hpp"

namespace metfa {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "float32 payload needs IEEE-754 floats");

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | b[at + k];
  return v;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path, "read failed");
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError(path, "write failed");
}

std::vector<std::uint8_t> encode_sample_matrix(const SampleMatrix& matrix) {
  constexpr auto u32_max = std::numeric_limits<std::uint32_t>::max();
  if (matrix.n_samples() > u32_max || matrix.n_features() > u32_max) {
    throw DomainError("sample matrix too large for the METF format");
  }
  std::uint16_t width = 0, height = 0;
  if (const auto& shape = matrix.shape()) {
    if (shape->width > 0xffff || shape->height > 0xffff) {
      throw DomainError("spatial shape sides must fit in 16 bits");
    }
    width = static_cast<std::uint16_t>(shape->width);
    height = static_cast<std::uint16_t>(shape->height);
  }

  std::vector<std::uint8_t> out;
  out.reserve(kMetfHeaderSize + 4 * matrix.values().size());
  for (char c : std::string_view("METF")) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kMetfVersion);
  out.push_back(matrix.tie_broken() ? 0x01 : 0x00);
  put_u32(out, static_cast<std::uint32_t>(matrix.n_samples()));
  put_u32(out, static_cast<std::uint32_t>(matrix.n_features()));
  put_u16(out, width);
  put_u16(out, height);
  const std::size_t f = matrix.n_features();
  for (std::size_t k = 0; k < matrix.values().size(); ++k) {
    const auto v = static_cast<float>(matrix.values()[k]);
    if (!std::isfinite(v)) {
      throw DomainError("value at sample " + std::to_string(k / f) + ", feature " +
                        std::to_string(k % f) + " does not fit in float32");
    }
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

SampleMatrix decode_sample_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "METF", 4) != 0) {
    throw FormatError(0, "bad magic, expected \"METF\"");
  }
  if (bytes.size() < kMetfHeaderSize) throw FormatError(bytes.size(), "truncated header");
  if (bytes[4] != kMetfVersion) {
    throw FormatError(4, "unsupported version " + std::to_string(bytes[4]));
  }
  const std::uint8_t flags = bytes[5];
  if (flags & ~0x01u) throw FormatError(5, "unknown flag bits set");
  const std::uint32_t n = get_u32(bytes, 6);
  const std::uint32_t f = get_u32(bytes, 10);
  const std::uint16_t width = get_u16(bytes, 14);
  const std::uint16_t height = get_u16(bytes, 16);
  if (n == 0) throw FormatError(6, "n_samples is zero");
  if (f == 0) throw FormatError(10, "n_features is zero");
  std::optional<SpatialShape> shape;
  if (width != 0 || height != 0) {
    if (width == 0 || height == 0) throw FormatError(14, "only one of width/height is zero");
    if (static_cast<std::uint64_t>(width) * height != f) {
      throw FormatError(14, "width x height does not equal n_features");
    }
    shape = SpatialShape{width, height};
  }

  const std::uint64_t count = static_cast<std::uint64_t>(n) * f;
  const std::uint64_t expected = kMetfHeaderSize + 4 * count;
  if (bytes.size() < expected) throw FormatError(bytes.size(), "truncated payload");
  if (bytes.size() > expected) throw FormatError(expected, "trailing bytes after payload");

  std::vector<double> values(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const float v = std::bit_cast<float>(get_u32(bytes, kMetfHeaderSize + 4 * k));
    if (!std::isfinite(v)) throw NonFiniteValue(k / f, k % f);
    values[k] = v;
  }
  return SampleMatrix(n, f, std::move(values), shape, (flags & 0x01) != 0);
}

void write_sample_matrix(const SampleMatrix& matrix, const std::string& path) {
  write_file(path, encode_sample_matrix(matrix));
}

SampleMatrix read_sample_matrix(const std::string& path) {
  return decode_sample_matrix(read_file(path));
}

std::vector<std::uint8_t> encode_pgm(const PgmImage& image) {
  if (image.width == 0 || image.height == 0) throw DomainError("PGM image has zero size");
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw DomainError("PGM pixel count does not match its size");
  }
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

PgmImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError(0, "not a binary PGM (P5)");
  }
  pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) -> std::uint32_t {
    skip_space();
    const std::size_t start = pos;
    std::uint64_t v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError(start, std::string(what) + " too large");
      }
      ++pos;
    }
    if (pos == start) throw FormatError(start, std::string("expected ") + what);
    return static_cast<std::uint32_t>(v);
  };
  PgmImage image;
  image.width = number("width");
  image.height = number("height");
  const std::size_t maxval_at = pos;
  const std::uint32_t maxval = number("maxval");
  if (image.width == 0 || image.height == 0) throw FormatError(maxval_at, "zero image size");
  if (maxval != 255) throw FormatError(maxval_at, "only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError(pos, "expected a single whitespace before the raster");
  }
  ++pos;
  const std::uint64_t count = static_cast<std::uint64_t>(image.width) * image.height;
  if (bytes.size() - pos < count) throw FormatError(bytes.size(), "truncated raster");
  if (bytes.size() - pos > count) throw FormatError(pos + count, "trailing bytes after raster");
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return image;
}

void write_pgm(const PgmImage& image, const std::string& path) {
  write_file(path, encode_pgm(image));
}

PgmImage read_pgm(const std::string& path) { return decode_pgm(read_file(path)); }

std::uint8_t grayscale_level(double score) {
  if (std::isnan(score)) throw DomainError("cannot render a NaN score");
  return static_cast<std::uint8_t>(std::floor(255.0 * std::clamp(score, 0.0, 1.0) + 0.5));
}

PgmImage render_map(std::span<const double> map, const std::optional<SpatialShape>& shape,
                    MapMode mode) {
  if (!shape) throw DomainError("map export needs a spatial shape");
  if (shape->area() != map.size() || map.empty()) {
    throw DomainError("shape " + std::to_string(shape->width) + "x" +
                      std::to_string(shape->height) + " does not match a map of " +
                      std::to_string(map.size()) + " scores");
  }
  PgmImage image{shape->width, shape->height, std::vector<std::uint8_t>(map.size())};
  for (std::size_t j = 0; j < map.size(); ++j) {
    if (mode == MapMode::kGrayscale) {
      image.pixels[j] = grayscale_level(map[j]);
    } else if (map[j] == -1.0) {
      image.pixels[j] = 0;
    } else if (map[j] == 0.0) {
      image.pixels[j] = 128;
    } else if (map[j] == 1.0) {
      image.pixels[j] = 255;
    } else {
      throw DomainError("ternary map value at " + std::to_string(j) + " is not -1, 0 or +1");
    }
  }
  return image;
}

void export_map(std::span<const double> map, const std::optional<SpatialShape>& shape,
                const std::string& path, MapMode mode) {
  write_pgm(render_map(map, shape, mode), path);
}

std::vector<double> significance_values(const SignificanceMap& map) {
  std::vector<double> out(map.labels.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<int>(map.labels[j]);
  return out;
}

void export_significance(const SignificanceMap& map, const std::optional<SpatialShape>& shape,
                         const std::string& path) {
  export_map(significance_values(map), shape, path, MapMode::kTernary);
}

Json to_json(const RunManifest& manifest) {
  Json j;
  j["subcommand"] = manifest.subcommand;
  j["tool_version"] = kToolVersion;
  j["config"] = manifest.config;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  return j;
}

Json to_json(const MetricsReport& report) {
  Json j;
  j["noise"] = report.noise;
  j["draws"] = report.draws;
  j["steps"] = report.steps;
  j["seed"] = report.seed;
  Json values = Json::object();
  for (const auto& [name, v] : report.values) values[name] = v;
  j["metrics"] = std::move(values);
  return j;
}

Json to_json(const ConfidenceBundle& bundle) {
  Json j;
  j["alpha"] = bundle.indices.alpha;
  j["n"] = bundle.indices.n;
  j["k1"] = bundle.indices.k1;
  j["k2"] = bundle.indices.k2;
  j["smoothed"] = bundle.smoothed;
  j["lower"] = bundle.lower;
  j["upper"] = bundle.upper;
  return j;
}

Json to_json(const SignificanceMap& map) {
  Json j;
  j["h"] = map.threshold_h;
  j["alpha"] = map.alpha;
  Json labels = Json::array();
  for (auto l : map.labels) labels.push_back(static_cast<int>(l));
  j["labels"] = std::move(labels);
  j["counts"] = map.counts;
  return j;
}

Json to_json(const StabilityComparison& comparison) {
  Json j;
  j["mstd_smoothed"] = comparison.mstd_smoothed;
  j["mstd_mean"] = comparison.mstd_mean;
  if (comparison.ratio) {
    j["ratio"] = *comparison.ratio;
  } else {
    j["ratio"] = "undefined";
  }
  j["k1"] = comparison.k1;
  j["k2"] = comparison.k2;
  return j;
}

Json make_report(const RunManifest& manifest, const Json& body) {
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["manifest"] = to_json(manifest);
  for (const auto& [key, value] : body.items()) j[key] = value;
  return j;
}

// nlohmann prints doubles in their shortest round-trip form, so parsing the
// dump gives back the same bits.
std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

void write_report(const Json& report, const std::string& path) {
  const std::string text = dump_report(report);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Json read_report(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(e.byte, path + ": " + e.what());
  }
}

}  // namespace metfa
