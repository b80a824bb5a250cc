#pragma once

#include <stdexcept>
#include <string>

namespace reliance {

// One exception type per contract failure; CLI maps them onto exit codes
// (data errors -> 2, numeric failures -> 3).

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedCsvError : DataError {
    using DataError::DataError;
};
struct MissingColumnError : DataError {
    using DataError::DataError;
};
struct BadLabelError : DataError {
    using DataError::DataError;
};
struct MissingTextError : DataError {
    using DataError::DataError;
};
struct EmptyCorpusError : DataError {
    using DataError::DataError;
};
struct UnknownDocumentError : DataError {
    using DataError::DataError;
};
struct SingleClassError : DataError {
    using DataError::DataError;
};
struct EmptyInputError : DataError {
    using DataError::DataError;
};
struct EmptySequenceError : DataError {
    using DataError::DataError;
};
struct NegativeFeatureError : DataError {
    using DataError::DataError;
};
struct FoldTooSmallError : DataError {
    using DataError::DataError;
};
struct EmptyEvaluationError : DataError {
    using DataError::DataError;
};
struct BundleFormatError : DataError {
    using DataError::DataError;
};
struct ConfigError : DataError {
    using DataError::DataError;
};
struct UntrainedModelError : DataError {
    using DataError::DataError;
};

struct ShapeMismatchError : NumericError {
    using NumericError::NumericError;
};
struct NumericOverflowError : NumericError {
    using NumericError::NumericError;
};
struct BudgetTooSmallError : NumericError {
    using NumericError::NumericError;
};

// Tags a failure with the pipeline stage it escaped from; keeps the broad
// category so the CLI can map it onto an exit code.
struct StageError : std::runtime_error {
    enum class Kind { Data, Numeric };
    StageError(const std::string& stage, const std::string& what, Kind k)
        : std::runtime_error("stage " + stage + ": " + what), stage_name(stage), kind(k) {}
    std::string stage_name;
    Kind kind;
};

}  // namespace reliance
