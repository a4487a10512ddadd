#ifndef METFA_IO_FORMATS_HPP
#define METFA_IO_FORMATS_HPP

// Persistence: the METF sample-matrix file, PGM map export and JSON reports.
//
// METF v1 layout (all integers little-endian):
//   offset  0  4 bytes  magic "METF"
//   offset  4  1 byte   version, 0x01
//   offset  5  1 byte   flags, bit0 = tie_broken, other bits must be zero
//   offset  6  u32      n_samples (> 0)
//   offset 10  u32      n_features (> 0)
//   offset 14  u16      width  (0 for non-spatial)
//   offset 16  u16      height (0 for non-spatial)
//   offset 18  float32  n_samples * n_features values, sample-major
// When width and height are nonzero their product equals n_features.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metfa/map_builder.hpp"
#include "metfa/metrics.hpp"
#include "metfa/sample_matrix.hpp"

namespace metfa {

inline constexpr std::string_view kToolName = "metfa";
inline constexpr std::string_view kToolVersion = "1.0.0";

inline constexpr std::size_t kMetfHeaderSize = 18;
inline constexpr std::uint8_t kMetfVersion = 0x01;

using Json = nlohmann::ordered_json;

// Values are stored as float32; throws DomainError when a value overflows
// float32 or the shape does not fit in 16 bits per side.
std::vector<std::uint8_t> encode_sample_matrix(const SampleMatrix& matrix);
// Throws FormatError (with the byte offset of the offending field) or
// NonFiniteValue.
SampleMatrix decode_sample_matrix(std::span<const std::uint8_t> bytes);

void write_sample_matrix(const SampleMatrix& matrix, const std::string& path);
SampleMatrix read_sample_matrix(const std::string& path);

// 8-bit binary greymap.
struct PgmImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, maxval 255

  bool operator==(const PgmImage&) const = default;
};

enum class MapMode {
  kGrayscale,  // floor(255 * clamp(score, 0, 1) + 0.5)
  kTernary,    // -1 -> 0, 0 -> 128, +1 -> 255
};

std::vector<std::uint8_t> encode_pgm(const PgmImage& image);
PgmImage decode_pgm(std::span<const std::uint8_t> bytes);
void write_pgm(const PgmImage& image, const std::string& path);
PgmImage read_pgm(const std::string& path);

std::uint8_t grayscale_level(double score);

// Throws DomainError when the shape is missing or does not match the map, or
// (ternary) when a value is not -1, 0 or +1.
PgmImage render_map(std::span<const double> map, const std::optional<SpatialShape>& shape,
                    MapMode mode);
void export_map(std::span<const double> map, const std::optional<SpatialShape>& shape,
                const std::string& path, MapMode mode);
void export_significance(const SignificanceMap& map, const std::optional<SpatialShape>& shape,
                         const std::string& path);

std::vector<double> significance_values(const SignificanceMap& map);

// Subcommand, resolved configuration and file paths of one run.
struct RunManifest {
  std::string subcommand;
  Json config = Json::object();
  Json inputs = Json::object();
  Json outputs = Json::object();
};

Json to_json(const RunManifest& manifest);
Json to_json(const MetricsReport& report);
Json to_json(const ConfidenceBundle& bundle);
Json to_json(const SignificanceMap& map);
Json to_json(const StabilityComparison& comparison);

// {"tool", "version", "manifest", ...body}
Json make_report(const RunManifest& manifest, const Json& body = Json::object());

std::string dump_report(const Json& report);
void write_report(const Json& report, const std::string& path);
Json read_report(const std::string& path);

// Whole-file helpers; failures raise IoError naming the path.
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace metfa

#endif  // METFA_IO_FORMATS_HPP
