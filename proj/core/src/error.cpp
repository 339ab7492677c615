#include "fedsim/error.hpp"

namespace fedsim {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::missing_file: return "MissingFile";
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::empty_data: return "EmptyData";
    case ErrorCode::degenerate_split: return "DegenerateSplit";
    case ErrorCode::too_few_rows: return "TooFewRows";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::too_few_minority: return "TooFewMinority";
    case ErrorCode::single_class: return "SingleClass";
    case ErrorCode::single_class_init: return "SingleClassInit";
    case ErrorCode::invalid_hyper: return "InvalidHyper";
    case ErrorCode::malformed_model: return "MalformedModel";
    case ErrorCode::invalid_key: return "InvalidKey";
    case ErrorCode::invalid_token: return "InvalidToken";
    case ErrorCode::invalid_signature: return "InvalidSignature";
    case ErrorCode::expired_token: return "Expired";
    case ErrorCode::invalid_padding: return "InvalidPadding";
    case ErrorCode::invalid_epsilon: return "InvalidEpsilon";
    case ErrorCode::invalid_score: return "InvalidScore";
    case ErrorCode::all_zero_mass: return "AllZeroMass";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::crypto_failure: return "CryptoFailure";
    case ErrorCode::training_failure: return "TrainingFailure";
    case ErrorCode::invalid_config: return "InvalidConfig";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

CsvParseError::CsvParseError(long long row, long long column, const std::string& detail)
    : Error(ErrorCode::parse_error,
            "row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + detail),
      row_(row),
      column_(column) {}

void raise(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace fedsim
