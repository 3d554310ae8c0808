#pragma once

#include <stdexcept>
#include <string>

namespace turnkit {

/// Base of every error the library throws. `kind()` is a stable
/// machine-readable tag used by the CLI's JSON error objects.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

/// A record that does not match its schema. `line` is 1-based, 0 if unknown.
class SchemaError : public Error {
public:
    SchemaError(size_t line, std::string field, const std::string& message)
        : Error("schema", format(line, field, message)), line_(line), field_(std::move(field)), message_(message) {}

    /// Re-positions an error raised without line information.
    SchemaError at_line(size_t line) const { return SchemaError(line, field_, message_); }

    size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

private:
    static std::string format(size_t line, const std::string& field, const std::string& message) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + message;
    }

    size_t line_;
    std::string field_;
    std::string message_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

/// Failure of a chat or embedding backend.
class ClientError : public Error {
public:
    explicit ClientError(const std::string& message) : Error("client", message) {}
};

}  // namespace turnkit
