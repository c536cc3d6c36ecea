#pragma once

#include <stdexcept>
#include <string>

namespace lookahead {

// Error categories map one-to-one onto CLI exit codes:
//   UsageError -> 1, DataError/FormatError -> 2, RuntimeError family -> 3.

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model/result container could not be parsed (bad magic, version, truncation).
struct FormatError : DataError {
  using DataError::DataError;
};

// Corpus ingestion problems. Carries the 1-based line number when known.
struct IngestionError : DataError {
  IngestionError(const std::string& what, std::size_t line_no)
      : DataError(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration would exceed its guard.
struct CapacityError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

// Loss became non-finite during training.
struct TrainingError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

// A loss term is +inf (e.g. P_EOS == 1 at a non-EOS event).
struct NumericError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace lookahead
