#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slurg {

/// Base of every error the toolkit throws. `exit_code()` follows the CLI
/// convention: 1 data error, 2 config error, 3 transport failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, bool retryable = true)
        : Error(what), retryable_(retryable) {}
    int exit_code() const noexcept override { return 3; }
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

enum class MarkupErrorKind {
    UnknownTag,
    UnbalancedClose,
    UnclosedTag,
    CrossingTags,
    EmptySpan,
    DuplicateSpan,
    InvalidEncoding,
};

const char* to_string(MarkupErrorKind kind) noexcept;

class MalformedMarkup : public DataError {
public:
    MalformedMarkup(std::size_t position, MarkupErrorKind kind, const std::string& detail);

    // Character offset into the tagged input.
    std::size_t position() const noexcept { return position_; }
    MarkupErrorKind kind() const noexcept { return kind_; }

private:
    std::size_t position_;
    MarkupErrorKind kind_;
};

class InvalidSample : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class TextMismatch : public DataError {
public:
    explicit TextMismatch(std::string sample_id)
        : DataError("annotators disagree on the text of sample '" + sample_id + "'"),
          sample_id_(std::move(sample_id)) {}
    const std::string& sample_id() const noexcept { return sample_id_; }

private:
    std::string sample_id_;
};

class NoSharedSamples : public DataError {
public:
    using DataError::DataError;
};

class JoinFailure : public DataError {
public:
    using DataError::DataError;
};

class IoFailure : public DataError {
public:
    using DataError::DataError;
};

class SchemaViolation : public DataError {
public:
    SchemaViolation(std::size_t line, const std::string& detail)
        : DataError("line " + std::to_string(line) + ": " + detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NotEnoughSamples : public DataError {
public:
    using DataError::DataError;
};

class EmptyAfterFiltering : public DataError {
public:
    using DataError::DataError;
};

class MissingPos : public DataError {
public:
    using DataError::DataError;
};

class OutOfScale : public DataError {
public:
    using DataError::DataError;
};

class UnknownTask : public DataError {
public:
    using DataError::DataError;
};

class TextDrift : public DataError {
public:
    using DataError::DataError;
};

/// A pipeline stage failed; keeps the exit code of the underlying error.
class StageFailure : public Error {
public:
    StageFailure(std::string stage, const Error& cause)
        : Error("stage '" + stage + "' failed: " + cause.what()),
          stage_(std::move(stage)),
          code_(cause.exit_code()) {}
    const std::string& stage() const noexcept { return stage_; }
    int exit_code() const noexcept override { return code_; }

private:
    std::string stage_;
    int code_;
};

}  // namespace slurg
