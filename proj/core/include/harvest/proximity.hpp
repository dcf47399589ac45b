#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/diagnostics.hpp"
#include "harvest/model.hpp"

namespace harvest::proximity {

inline constexpr std::uint32_t kDefaultWindow = 3;
inline constexpr double kDefaultThreshold = 0.5;

/// First line of a secrets report.
inline constexpr std::string_view kSecretsHeader = "#harvest-secrets v1";

/// Candidate regexes, applied to one line at a time.
inline constexpr std::string_view kIpPattern = R"(\b(?:\d{1,3}\.){3}\d{1,3}\b)";
inline constexpr std::string_view kDnsPattern = R"(\b[A-Za-z0-9][A-Za-z0-9-.]*\.\D{2,4}\b)";

struct SecretFinding {
    std::string value;
    SourceLocation location;
    std::string rule_id;
    std::string source_tool;

    friend bool operator==(const SecretFinding&, const SecretFinding&) = default;
};

enum class CandidateKind { Ip, Dns };

struct AssetCandidate {
    std::string host;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    CandidateKind kind_hint = CandidateKind::Ip;
    std::string line_text;
};

using harvest::SchemaError;

/// Parses a secrets report:
///
///     #harvest-secrets v1
///     tool<TAB>rule<TAB>path<TAB>line<TAB>value
///
/// Fields escape `\\`, `\t`, `\n` and `\r` with a backslash. Blank lines and
/// lines starting with `#` after the header are skipped. Findings with the same
/// (value, path, line) are merged, keeping the first. Throws SchemaError.
std::vector<SecretFinding> ingest_secrets(std::string_view report);
std::vector<SecretFinding> ingest_secrets_file(const std::string& path);

/// Writes findings in the ingestion format.
std::string write_secrets(const std::vector<SecretFinding>& findings);

/// Fallback detector: an assignment or key whose name contains password,
/// passwd, pwd or secret (any case) bound to a quoted literal of at least four
/// characters that is not a placeholder.
std::vector<SecretFinding> builtin_detect_secrets(std::string_view content, const SourceLocation& ctx);

/// IPv4 literal whose octets are all at most 255.
bool valid_ipv4(std::string_view s);

/// IP and DNS matches on lines [secret_line - window, secret_line + window],
/// clipped to the file. `lines` is 0-indexed; line numbers are 1-based.
std::vector<AssetCandidate> candidate_assets(const std::vector<std::string_view>& lines, std::uint32_t secret_line,
                                             std::uint32_t window = kDefaultWindow);

/// mysql / postgres / mongo / mssql keywords, else Unknown.
DatabaseKind kind_from_text(std::string_view line);

struct ProximityOptions {
    std::uint32_t window = kDefaultWindow;
    double threshold = kDefaultThreshold;
};

/// Picks the candidate whose line is most Jaro-Winkler-similar to the secret
/// line; ties go to the smaller line distance, then the smaller line number.
std::optional<SecretAssetPair> pair_by_proximity(const SecretFinding& finding,
                                                 const std::vector<std::string_view>& lines,
                                                 const ProximityOptions& options = {});

}  // namespace harvest::proximity
