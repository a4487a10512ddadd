#ifndef METFA_SRC_TEXT_UTIL_HPP
#define METFA_SRC_TEXT_UTIL_HPP

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "metfa/errors.hpp"

namespace metfa::detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DomainError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

inline std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DomainError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace metfa::detail

#endif  // METFA_SRC_TEXT_UTIL_HPP
