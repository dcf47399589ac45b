#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/model.hpp"

namespace harvest {

enum class Severity { Info, Warning, Error };

std::string_view to_string(Severity severity);
std::optional<Severity> parse_severity(std::string_view text);

struct Diagnostic {
    Severity severity = Severity::Info;
    std::string code;
    std::string message;
    std::optional<SourceLocation> location;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Append-only diagnostic collector threaded through the stages.
class Diagnostics {
public:
    void add(Severity severity, std::string code, std::string message,
             std::optional<SourceLocation> location = std::nullopt);
    void info(std::string code, std::string message, std::optional<SourceLocation> location = std::nullopt);
    void warn(std::string code, std::string message, std::optional<SourceLocation> location = std::nullopt);
    void error(std::string code, std::string message, std::optional<SourceLocation> location = std::nullopt);

    void append(const Diagnostics& other);
    void append(std::vector<Diagnostic> other);

    const std::vector<Diagnostic>& items() const { return items_; }
    std::vector<Diagnostic> take() { return std::move(items_); }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    std::size_t count(std::string_view code) const;

private:
    std::vector<Diagnostic> items_;
};

/// Sorts by (path, line, column, code, message) and removes exact duplicates.
void normalize(std::vector<Diagnostic>& diagnostics);

/// Fatal condition: invalid target, invalid catalog, corrupt repository.
class FatalError : public std::runtime_error {
public:
    FatalError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Malformed record in an ingested file.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::size_t record, const std::string& message);
    /// 1-based record (line) number; the header is record 1.
    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

}  // namespace harvest
