#ifndef METFA_SRC_ANNOTATE_HPP
#define METFA_SRC_ANNOTATE_HPP

#include <exception>
#include <string>

#include "metfa/errors.hpp"

namespace metfa::detail {

// Rethrows `failure` with `prefix` prepended to its message, keeping the
// exception type for the types that carry only a message.
[[noreturn]] inline void rethrow_annotated(std::exception_ptr failure, const std::string& prefix) {
  try {
    std::rethrow_exception(failure);
  } catch (const ZeroScore& e) {
    throw ZeroScore(prefix + e.what());
  } catch (const SpecMismatch& e) {
    throw SpecMismatch(prefix + e.what());
  } catch (const EmptyMask& e) {
    throw EmptyMask(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const NonFiniteValue&) {
    throw;
  } catch (const InsufficientSamples&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace metfa::detail

#endif  // METFA_SRC_ANNOTATE_HPP
