#ifndef METFA_ERRORS_HPP
#define METFA_ERRORS_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace metfa {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the operation's domain (bad k, alpha, empty input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Too few sampled explanations for the requested confidence level.
class InsufficientSamples : public Error {
 public:
  InsufficientSamples(std::size_t n, std::size_t required, const std::string& what)
      : Error(what), n_(n), required_(required) {}

  std::size_t n() const { return n_; }
  std::size_t required() const { return required_; }

 private:
  std::size_t n_;
  std::size_t required_;
};

// k2 - k1 - 1 < 1: no order statistic strictly inside the interval.
class EmptyTrim : public Error {
 public:
  using Error::Error;
};

// Jenks on values that are all identical.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Noise kind does not apply to the input kind (spatial vs token).
class SpecMismatch : public Error {
 public:
  using Error::Error;
};

// The normalizing score f_c(I) is (numerically) zero.
class ZeroScore : public Error {
 public:
  using Error::Error;
};

// Segmentation mask with no selected feature.
class EmptyMask : public Error {
 public:
  using Error::Error;
};

// Malformed file; offset is the byte (or line, for text formats) where
// the reader gave up.
class FormatError : public Error {
 public:
  FormatError(std::uint64_t offset, const std::string& what)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class NonFiniteValue : public Error {
 public:
  NonFiniteValue(std::size_t sample, std::size_t feature)
      : Error("non-finite value at sample " + std::to_string(sample) + ", feature " +
              std::to_string(feature)),
        sample_(sample),
        feature_(feature) {}

  std::size_t sample() const { return sample_; }
  std::size_t feature() const { return feature_; }

 private:
  std::size_t sample_;
  std::size_t feature_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace metfa

#endif  // METFA_ERRORS_HPP
