#ifndef CULRAG_ERRORS_HPP
#define CULRAG_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace culrag {

/// Base class for all engine errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (dataset records, KB files, fixture files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Bad or inconsistent configuration, including requests for models the
/// serving endpoint does not know. Never retried.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Network-level failure that persisted through the retry budget.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A call that exceeded its deadline. Carries the elapsed wall time.
class TimeoutError : public TransportError {
 public:
  TimeoutError(const std::string& what, std::int64_t elapsed_ms)
      : TransportError(what), elapsed_ms_(elapsed_ms) {}

  std::int64_t elapsed_ms() const { return elapsed_ms_; }

 private:
  std::int64_t elapsed_ms_;
};

}  // namespace culrag

#endif  // CULRAG_ERRORS_HPP
