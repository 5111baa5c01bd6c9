#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delaykit {

enum class ErrorKind {
  invalid_dimension,
  invalid_argument,
  dimension_mismatch,
  non_invertible_flow,
  degenerate_pair,
  undefined_soft_rank,
  insufficient_samples,
  out_of_range,
  no_estimate,
  condition_degenerate,
  unsupported,
  config,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` lets callers branch without
/// parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace delaykit
