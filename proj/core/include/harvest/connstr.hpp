#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/diagnostics.hpp"
#include "harvest/model.hpp"

namespace harvest::connstr {

enum class RuleGroup { UriFamily, KeyValueFamily, Jdbc };

std::string_view to_string(RuleGroup group);

struct ConnStringRule {
    RuleGroup group;
    std::string name;
    /// Human-readable grammar, shown by `harvest explain-rules`.
    std::string grammar;
    /// Perl-syntax pattern with named groups `dbms`, `credentials`, `server`.
    std::string pattern;
    std::vector<DatabaseKind> kinds;
};

/// The three rule groups, compiled once per process.
const std::vector<ConnStringRule>& compile_rules();

/// Fields decomposed from a connection string before the password contract
/// is enforced. The data-flow stage uses these for partially specified DSNs.
struct ConnStringFields {
    RuleGroup group = RuleGroup::UriFamily;
    DatabaseKind kind = DatabaseKind::Unknown;
    /// URI/JDBC scheme as written, e.g. "mongodb+srv" or "jdbc:mysql".
    std::optional<std::string> scheme;
    /// Key-value family only: Driver (or Provider) value with braces stripped.
    std::optional<std::string> driver;
    /// JDBC only: credentials were given as query parameters rather than before the host.
    bool credentials_in_query = false;
    std::optional<std::string> username;
    std::optional<std::string> password;
    std::optional<std::string> host;
    std::optional<std::uint16_t> port;
    std::optional<std::string> database_name;
    /// Hosts after the first in a comma-separated host list.
    std::vector<std::string> extra_hosts;

    friend bool operator==(const ConnStringFields&, const ConnStringFields&) = default;
};

struct ParsedConnString {
    DatabaseKind kind = DatabaseKind::Unknown;
    SecretCredential credential;
    AssetIdentifier asset;
    std::string raw;
    /// Byte range [begin, end) within the scanned line.
    std::size_t span_begin = 0;
    std::size_t span_end = 0;
    std::vector<std::string> extra_hosts;
};

enum class ParseErrorCode { NoMatch, InvalidPort, MissingServer, MissingPassword, PlaceholderHost };

std::string_view to_string(ParseErrorCode code);

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ParseErrorCode code() const noexcept { return code_; }

private:
    ParseErrorCode code_;
};

/// Lenient decomposition; throws ParseError{NoMatch|InvalidPort|MissingServer}.
/// Missing passwords are not an error here.
ConnStringFields decompose_uri(std::string_view s);
ConnStringFields decompose_kv(std::string_view s);
ConnStringFields decompose_jdbc(std::string_view s);

/// Tries each grammar in turn (JDBC, URI, key-value) against the whole string
/// and returns the first that decomposes it.
std::optional<ConnStringFields> decompose_any(std::string_view s);

/// Strict parsers: additionally require a non-empty password and a concrete host.
ParsedConnString parse_uri_connstring(std::string_view s);
ParsedConnString parse_kv_connstring(std::string_view s);
ParsedConnString parse_jdbc_connstring(std::string_view s);

/// Serializes fields back into the given grammar (credentials percent-encoded
/// where the grammar requires it).
std::string serialize(const ConnStringFields& fields);

/// Scans text line by line and reports one PatternMatch pair per accepted
/// match. `ctx` supplies commit id and file path; its line/column are ignored.
std::vector<SecretAssetPair> scan_text(std::string_view content, const SourceLocation& ctx, Diagnostics& diags);

}  // namespace harvest::connstr
