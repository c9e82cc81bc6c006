#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spurlens {

// Every engine failure carries one of these codes. The kind decides how
// front-ends surface it (HTTP status, CLI exit code).
enum class ErrorCode {
  // input / configuration
  parse_error,
  schema_error,
  empty_dataset,
  inference_error,
  unknown_column,
  invalid_config,
  invalid_rule,
  invalid_argument,
  // degenerate analyses
  degenerate_encoding,
  empty_summary,
  collinearity,
  insufficient_sample,
  separation,
  undefined_correlation,
  degenerate_auc,
  bootstrap_failure,
  scoring_error,
  empty_ranking,
  degenerate_split,
  arm_size,
  empty_report,
  partition_error,
  single_leaf,
  single_bin,
  empty_diagram,
  // service state
  not_found,
  partition_required,
  payload_too_large,
};

enum class ErrorKind { validation, degenerate, not_found, conflict, too_large };

std::string_view error_name(ErrorCode code) noexcept;
ErrorKind error_kind(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string detail = {})
      : std::runtime_error(std::move(message)), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return error_kind(code_); }
  std::string_view name() const noexcept { return error_name(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace spurlens
