#include "harvest/diagnostics.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>

namespace harvest {

std::string_view to_string(Severity severity) {
    switch (severity) {
        case Severity::Info:
            return "info";
        case Severity::Warning:
            return "warning";
        case Severity::Error:
            return "error";
    }
    return "?";
}

std::optional<Severity> parse_severity(std::string_view text) {
    if (text == "info") return Severity::Info;
    if (text == "warning") return Severity::Warning;
    if (text == "error") return Severity::Error;
    return std::nullopt;
}

void Diagnostics::add(Severity severity, std::string code, std::string message,
                      std::optional<SourceLocation> location) {
    items_.push_back(Diagnostic{severity, std::move(code), std::move(message), std::move(location)});
}

void Diagnostics::info(std::string code, std::string message, std::optional<SourceLocation> location) {
    add(Severity::Info, std::move(code), std::move(message), std::move(location));
}

void Diagnostics::warn(std::string code, std::string message, std::optional<SourceLocation> location) {
    add(Severity::Warning, std::move(code), std::move(message), std::move(location));
}

void Diagnostics::error(std::string code, std::string message, std::optional<SourceLocation> location) {
    add(Severity::Error, std::move(code), std::move(message), std::move(location));
}

void Diagnostics::append(const Diagnostics& other) {
    items_.insert(items_.end(), other.items_.begin(), other.items_.end());
}

void Diagnostics::append(std::vector<Diagnostic> other) {
    items_.insert(items_.end(), std::make_move_iterator(other.begin()), std::make_move_iterator(other.end()));
}

std::size_t Diagnostics::count(std::string_view code) const {
    return static_cast<std::size_t>(
        std::count_if(items_.begin(), items_.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

void normalize(std::vector<Diagnostic>& diagnostics) {
    const auto key = [](const Diagnostic& d) {
        static const SourceLocation none{};
        const SourceLocation& loc = d.location ? *d.location : none;
        return std::tie(loc.file_path, loc.line, loc.column, loc.commit_id, d.code, d.message, d.severity);
    };
    std::sort(diagnostics.begin(), diagnostics.end(),
              [&](const Diagnostic& a, const Diagnostic& b) {
                  if (a.location.has_value() != b.location.has_value()) return !a.location.has_value();
                  return key(a) < key(b);
              });
    diagnostics.erase(std::unique(diagnostics.begin(), diagnostics.end()), diagnostics.end());
}

SchemaError::SchemaError(std::size_t record, const std::string& message)
    : std::runtime_error(fmt::format("record {}: {}", record, message)), record_(record) {}

}  // namespace harvest
