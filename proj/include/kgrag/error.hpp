#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgrag {

enum class ErrorKind {
    file_not_found,
    malformed_json,
    schema_violation,
    duplicate_id,
    invalid_argument,
    invalid_chunk_params,
    duplicate_chunk_id,
    dimension_mismatch,
    missing_placeholder,
    invalid_n,
    empty_input,
    transport_error,
    protocol_error,
    backend_error,
    io_error,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::file_not_found: return "FileNotFound";
    case ErrorKind::malformed_json: return "MalformedJson";
    case ErrorKind::schema_violation: return "SchemaViolation";
    case ErrorKind::duplicate_id: return "DuplicateId";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::invalid_chunk_params: return "InvalidChunkParams";
    case ErrorKind::duplicate_chunk_id: return "DuplicateChunkId";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::missing_placeholder: return "MissingPlaceholder";
    case ErrorKind::invalid_n: return "InvalidN";
    case ErrorKind::empty_input: return "EmptyInput";
    case ErrorKind::transport_error: return "TransportError";
    case ErrorKind::protocol_error: return "ProtocolError";
    case ErrorKind::backend_error: return "BackendError";
    case ErrorKind::io_error: return "IoError";
    }
    return "Unknown";
}

/// Broad grouping used by the CLI to pick an exit code.
enum class ErrorCategory { usage, data, backend };

inline ErrorCategory category_of(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::invalid_chunk_params:
    case ErrorKind::missing_placeholder:
    case ErrorKind::invalid_n:
        return ErrorCategory::usage;
    case ErrorKind::transport_error:
    case ErrorKind::protocol_error:
    case ErrorKind::backend_error:
    case ErrorKind::dimension_mismatch:
        return ErrorCategory::backend;
    default:
        return ErrorCategory::data;
    }
}

/**
 * Every failure raised by the library. `location` names where the problem
 * was found: a file path plus JSON pointer or line number for data errors,
 * an endpoint for backend errors, a stage label for pipeline errors.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string location, std::string detail)
        : std::runtime_error(format(kind, location, detail)),
          kind_(kind),
          location_(std::move(location)),
          detail_(std::move(detail)) {}

    ErrorKind kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_of(kind_); }
    const std::string& location() const noexcept { return location_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Same error with `context` prepended to the detail.
    Error with_context(std::string_view context) const {
        return Error(kind_, location_, std::string(context) + ": " + detail_);
    }

private:
    static std::string format(ErrorKind kind, const std::string& location,
                              const std::string& detail) {
        std::string out(to_string(kind));
        if (!location.empty()) {
            out += " at ";
            out += location;
        }
        if (!detail.empty()) {
            out += ": ";
            out += detail;
        }
        return out;
    }

    ErrorKind kind_;
    std::string location_;
    std::string detail_;
};

} // namespace kgrag
