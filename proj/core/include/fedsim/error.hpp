#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Stable error taxonomy for the whole library. Tests match on codes rather
// than message text, and the CLI maps code categories to exit codes.
enum class ErrorCode {
  // dataset ingest / splitting
  missing_file,
  schema_mismatch,
  parse_error,
  empty_data,
  degenerate_split,
  too_few_rows,
  // oversampling
  dimension_mismatch,
  too_few_minority,
  single_class,
  // boosted-tree training and model codec
  single_class_init,
  invalid_hyper,
  malformed_model,
  // token envelope
  invalid_key,
  invalid_token,
  invalid_signature,
  expired_token,
  invalid_padding,
  // privacy mechanisms
  invalid_epsilon,
  invalid_score,
  // aggregation / metrics / orchestration
  all_zero_mass,
  length_mismatch,
  empty_input,
  crypto_failure,
  training_failure,
  // configuration
  invalid_config,
};

// Stable identifier, e.g. "InvalidSignature". Used as the message prefix so
// diagnostics name the failure class.
const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// CSV failure with 1-based data-row and column coordinates (the header line
// is row 0 conceptually and reported via schema_mismatch instead).
class CsvParseError : public Error {
 public:
  CsvParseError(long long row, long long column, const std::string& detail);

  long long row() const noexcept { return row_; }
  long long column() const noexcept { return column_; }

 private:
  long long row_;
  long long column_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& detail);

}  // namespace fedsim
