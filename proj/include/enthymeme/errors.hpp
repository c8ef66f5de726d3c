#pragma once

#include <stdexcept>
#include <string>

namespace enthymeme {

// Base for all library errors so callers can catch one type at the CLI boundary.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyEssayError : Error {
    explicit EmptyEssayError(const std::string& msg) : Error(msg) {}
};

struct DegenerateEmbeddingError : Error {
    explicit DegenerateEmbeddingError(const std::string& msg) : Error(msg) {}
};

struct VocabularyMissingError : Error {
    explicit VocabularyMissingError(const std::string& msg) : Error(msg) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

struct RatingOutOfRangeError : Error {
    explicit RatingOutOfRangeError(const std::string& msg) : Error(msg) {}
};

struct MissingDimensionModelError : Error {
    explicit MissingDimensionModelError(const std::string& msg) : Error(msg) {}
};

struct DimensionMismatchError : Error {
    explicit DimensionMismatchError(const std::string& msg) : Error(msg) {}
};

struct NoConvergenceError : Error {
    explicit NoConvergenceError(const std::string& msg) : Error(msg) {}
};

struct NoValidNegativePositionError : Error {
    explicit NoValidNegativePositionError(const std::string& msg) : Error(msg) {}
};

struct MarkerMissingError : Error {
    explicit MarkerMissingError(const std::string& msg) : Error(msg) {}
};

struct NotAGapInstanceError : Error {
    explicit NotAGapInstanceError(const std::string& msg) : Error(msg) {}
};

struct LengthMismatchError : Error {
    explicit LengthMismatchError(const std::string& msg) : Error(msg) {}
};

struct IoFailureError : Error {
    explicit IoFailureError(const std::string& msg) : Error(msg) {}
};

struct MalformedRecordError : Error {
    MalformedRecordError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace enthymeme
