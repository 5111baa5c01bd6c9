#include "delaykit/error.hpp"

namespace delaykit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::non_invertible_flow: return "non-invertible-flow";
    case ErrorKind::degenerate_pair: return "degenerate-pair";
    case ErrorKind::undefined_soft_rank: return "undefined-soft-rank";
    case ErrorKind::insufficient_samples: return "insufficient-samples";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::no_estimate: return "no-estimate";
    case ErrorKind::condition_degenerate: return "condition-degenerate";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace delaykit
