#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aqa {

enum class ErrorKind {
  config,
  dimension,
  unknown_action,
  invalid_input,
  dataset,
  io,
  backend_timeout,
  backend_unreachable,
  backend_protocol,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for everything the library rejects. `kind()` is what the
/// CLI reports in its machine-readable error document.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by agent backends. Carries the wall-clock time spent before the
/// failure so the executor can charge it as latency.
class BackendError : public Error {
 public:
  BackendError(ErrorKind kind, const std::string& message, double elapsed_s)
      : Error(kind, message), elapsed_s_(elapsed_s) {}

  double elapsed_s() const noexcept { return elapsed_s_; }

 private:
  double elapsed_s_;
};

}  // namespace aqa
