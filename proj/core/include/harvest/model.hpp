#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace harvest {

enum class DatabaseKind {
    MySQL,
    PostgreSQL,
    MongoDB,
    SQLServer,
    GenericODBC,
    GenericJDBC,
    Unknown,
};

enum class AssetClass {
    Loopback,
    PrivateRange,
    PublicIP,
    DnsName,
    Placeholder,
};

// Declaration order is not precedence; see method_rank().
enum class DetectionMethod {
    PatternMatch,
    DataFlow,
    ProximityHeuristic,
};

std::string_view to_string(DatabaseKind kind);
std::string_view to_string(AssetClass cls);
std::string_view to_string(DetectionMethod method);

std::optional<DatabaseKind> parse_database_kind(std::string_view text);
std::optional<AssetClass> parse_asset_class(std::string_view text);
std::optional<DetectionMethod> parse_detection_method(std::string_view text);

/// Lower rank wins during deduplication: DataFlow, then PatternMatch, then ProximityHeuristic.
int method_rank(DetectionMethod method);

struct SourceLocation {
    std::optional<std::string> commit_id;
    std::string file_path;
    std::uint32_t line = 1;
    std::optional<std::uint32_t> column;

    friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
    friend auto operator<=>(const SourceLocation&, const SourceLocation&) = default;
};

struct SecretCredential {
    std::optional<std::string> username;
    std::string password;

    friend bool operator==(const SecretCredential&, const SecretCredential&) = default;
};

struct AssetIdentifier {
    std::string host;
    std::optional<std::uint16_t> port;
    std::optional<std::string> database_name;
    std::optional<std::string> scheme;
    AssetClass asset_class = AssetClass::DnsName;

    friend bool operator==(const AssetIdentifier&, const AssetIdentifier&) = default;
};

struct SecretAssetPair {
    DatabaseKind kind = DatabaseKind::Unknown;
    SecretCredential credential;
    AssetIdentifier asset;
    SourceLocation secret_location;
    SourceLocation asset_location;
    DetectionMethod method = DetectionMethod::PatternMatch;
    std::optional<double> similarity_score;
    std::optional<SourceLocation> sink_call_location;

    friend bool operator==(const SecretAssetPair&, const SecretAssetPair&) = default;
};

/// Classifies a host string. Total: any input yields a class.
///   Loopback      localhost, 127.0.0.0/8, ::1
///   PrivateRange  10/8, 172.16/12, 192.168/16, IPv6 fc00::/7
///   PublicIP      any other literal IPv4/IPv6 address
///   Placeholder   template markers such as ${x}, {{x}}, <x>, $VAR, %(x)s, {x}
///   DnsName       everything else
AssetClass classify_asset(std::string_view host);

/// True when `host` carries a template marker instead of a concrete address.
bool is_placeholder(std::string_view host);

/// Builds an asset identifier whose class is derived from the host.
AssetIdentifier make_asset(std::string host,
                           std::optional<std::uint16_t> port = std::nullopt,
                           std::optional<std::string> database_name = std::nullopt,
                           std::optional<std::string> scheme = std::nullopt);

/// Parses a decimal port; nullopt unless the text is an integer in [1, 65535].
std::optional<std::uint16_t> parse_port(std::string_view text);

struct PairKey {
    std::string password;
    std::optional<std::string> username;
    std::string host;
    std::optional<std::uint16_t> port;
    std::string file_path;
    std::uint32_t line = 0;

    friend bool operator==(const PairKey&, const PairKey&) = default;
    friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

PairKey pair_identity(const SecretAssetPair& pair);

/// Deduplicates by identity key. Survivor: method precedence, then lowest
/// (file_path, line); remaining ties fall back to a total order over every
/// field so the result never depends on input order. Output is sorted by
/// (file_path, line, password).
std::vector<SecretAssetPair> merge_pairs(std::vector<SecretAssetPair> pairs);

/// Checks the per-pair invariants (non-empty password, class consistency,
/// score/sink-location presence by method). Returns a reason on violation.
std::optional<std::string> validate_pair(const SecretAssetPair& pair);

}  // namespace harvest
