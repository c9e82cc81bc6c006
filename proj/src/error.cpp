#include "spurlens/error.hpp"

namespace spurlens {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::schema_error: return "schema_error";
    case ErrorCode::empty_dataset: return "empty_dataset";
    case ErrorCode::inference_error: return "inference_error";
    case ErrorCode::unknown_column: return "unknown_column";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::invalid_rule: return "invalid_rule";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::degenerate_encoding: return "degenerate_encoding";
    case ErrorCode::empty_summary: return "empty_summary";
    case ErrorCode::collinearity: return "collinearity";
    case ErrorCode::insufficient_sample: return "insufficient_sample";
    case ErrorCode::separation: return "separation";
    case ErrorCode::undefined_correlation: return "undefined_correlation";
    case ErrorCode::degenerate_auc: return "degenerate_auc";
    case ErrorCode::bootstrap_failure: return "bootstrap_failure";
    case ErrorCode::scoring_error: return "scoring_error";
    case ErrorCode::empty_ranking: return "empty_ranking";
    case ErrorCode::degenerate_split: return "degenerate_split";
    case ErrorCode::arm_size: return "arm_size";
    case ErrorCode::empty_report: return "empty_report";
    case ErrorCode::partition_error: return "partition_error";
    case ErrorCode::single_leaf: return "single_leaf";
    case ErrorCode::single_bin: return "single_bin";
    case ErrorCode::empty_diagram: return "empty_diagram";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::partition_required: return "partition_required";
    case ErrorCode::payload_too_large: return "payload_too_large";
  }
  return "unknown";
}

ErrorKind error_kind(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::schema_error:
    case ErrorCode::empty_dataset:
    case ErrorCode::inference_error:
    case ErrorCode::unknown_column:
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_rule:
    case ErrorCode::invalid_argument:
      return ErrorKind::validation;
    case ErrorCode::not_found:
      return ErrorKind::not_found;
    case ErrorCode::partition_required:
      return ErrorKind::conflict;
    case ErrorCode::payload_too_large:
      return ErrorKind::too_large;
    default:
      return ErrorKind::degenerate;
  }
}

}  // namespace spurlens
