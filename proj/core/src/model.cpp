#include "harvest/model.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <map>

#include "harvest/text.hpp"

namespace harvest {

namespace {

constexpr std::array kKindNames = {
    std::pair{DatabaseKind::MySQL, std::string_view{"MySQL"}},
    std::pair{DatabaseKind::PostgreSQL, std::string_view{"PostgreSQL"}},
    std::pair{DatabaseKind::MongoDB, std::string_view{"MongoDB"}},
    std::pair{DatabaseKind::SQLServer, std::string_view{"SQLServer"}},
    std::pair{DatabaseKind::GenericODBC, std::string_view{"GenericODBC"}},
    std::pair{DatabaseKind::GenericJDBC, std::string_view{"GenericJDBC"}},
    std::pair{DatabaseKind::Unknown, std::string_view{"Unknown"}},
};

constexpr std::array kClassNames = {
    std::pair{AssetClass::Loopback, std::string_view{"Loopback"}},
    std::pair{AssetClass::PrivateRange, std::string_view{"PrivateRange"}},
    std::pair{AssetClass::PublicIP, std::string_view{"PublicIP"}},
    std::pair{AssetClass::DnsName, std::string_view{"DnsName"}},
    std::pair{AssetClass::Placeholder, std::string_view{"Placeholder"}},
};

constexpr std::array kMethodNames = {
    std::pair{DetectionMethod::PatternMatch, std::string_view{"PatternMatch"}},
    std::pair{DetectionMethod::DataFlow, std::string_view{"DataFlow"}},
    std::pair{DetectionMethod::ProximityHeuristic, std::string_view{"ProximityHeuristic"}},
};

template <typename Table, typename E>
std::string_view name_of(const Table& table, E value) {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "?";
}

template <typename E, typename Table>
std::optional<E> value_of(const Table& table, std::string_view text) {
    for (const auto& [v, name] : table) {
        if (name == text) return v;
    }
    return std::nullopt;
}

bool is_identifier_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Total order over every field; used only to make tie-breaking deterministic.
auto full_tuple(const SecretAssetPair& p) {
    return std::tie(p.secret_location, p.credential.password, p.credential.username, p.asset.host, p.asset.port,
                    p.asset.database_name, p.asset.scheme, p.asset_location, p.sink_call_location,
                    p.similarity_score);
}

bool full_less(const SecretAssetPair& a, const SecretAssetPair& b) {
    if (full_tuple(a) != full_tuple(b)) return full_tuple(a) < full_tuple(b);
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.method != b.method) return a.method < b.method;
    return a.asset.asset_class < b.asset.asset_class;
}

bool survivor_less(const SecretAssetPair& a, const SecretAssetPair& b) {
    const int ra = method_rank(a.method);
    const int rb = method_rank(b.method);
    if (ra != rb) return ra < rb;
    const auto la = std::tie(a.secret_location.file_path, a.secret_location.line);
    const auto lb = std::tie(b.secret_location.file_path, b.secret_location.line);
    if (la != lb) return la < lb;
    return full_less(a, b);
}

bool output_less(const SecretAssetPair& a, const SecretAssetPair& b) {
    const auto ka = std::tie(a.secret_location.file_path, a.secret_location.line, a.credential.password);
    const auto kb = std::tie(b.secret_location.file_path, b.secret_location.line, b.credential.password);
    if (ka != kb) return ka < kb;
    return full_less(a, b);
}

}  // namespace

std::string_view to_string(DatabaseKind kind) { return name_of(kKindNames, kind); }
std::string_view to_string(AssetClass cls) { return name_of(kClassNames, cls); }
std::string_view to_string(DetectionMethod method) { return name_of(kMethodNames, method); }

std::optional<DatabaseKind> parse_database_kind(std::string_view text) {
    return value_of<DatabaseKind>(kKindNames, text);
}
std::optional<AssetClass> parse_asset_class(std::string_view text) {
    return value_of<AssetClass>(kClassNames, text);
}
std::optional<DetectionMethod> parse_detection_method(std::string_view text) {
    return value_of<DetectionMethod>(kMethodNames, text);
}

int method_rank(DetectionMethod method) {
    switch (method) {
        case DetectionMethod::DataFlow:
            return 0;
        case DetectionMethod::PatternMatch:
            return 1;
        case DetectionMethod::ProximityHeuristic:
            return 2;
    }
    return 3;
}

bool is_placeholder(std::string_view host) {
    if (host.find("${") != std::string_view::npos) return true;
    if (host.find("{{") != std::string_view::npos) return true;
    if (host.find("%(") != std::string_view::npos) return true;
    // printf-style %s / %d / %r slot
    for (auto pct = host.find('%'); pct != std::string_view::npos; pct = host.find('%', pct + 1)) {
        if (pct + 1 < host.size() && (host[pct + 1] == 's' || host[pct + 1] == 'd' || host[pct + 1] == 'r') &&
            (pct + 2 == host.size() || !std::isalnum(static_cast<unsigned char>(host[pct + 2])))) {
            return true;
        }
    }
    const auto lt = host.find('<');
    if (lt != std::string_view::npos && host.find('>', lt) != std::string_view::npos) return true;
    // $VAR shell-style reference
    if (host.size() > 1 && host[0] == '$' && (std::isalpha(static_cast<unsigned char>(host[1])) || host[1] == '_'))
        return true;
    // {name} / {0} format-style slot
    const auto lb = host.find('{');
    if (lb != std::string_view::npos) {
        const auto rb = host.find('}', lb);
        if (rb != std::string_view::npos && rb > lb + 1 &&
            std::all_of(host.begin() + static_cast<long>(lb) + 1, host.begin() + static_cast<long>(rb),
                        is_identifier_char)) {
            return true;
        }
    }
    return false;
}

AssetClass classify_asset(std::string_view host) {
    if (is_placeholder(host)) return AssetClass::Placeholder;
    if (text::iequals(host, "localhost")) return AssetClass::Loopback;

    std::string h(host);
    if (h.size() > 2 && h.front() == '[' && h.back() == ']') h = h.substr(1, h.size() - 2);

    in_addr v4{};
    if (inet_pton(AF_INET, h.c_str(), &v4) == 1) {
        const auto* b = reinterpret_cast<const unsigned char*>(&v4.s_addr);
        if (b[0] == 127) return AssetClass::Loopback;
        if (b[0] == 10) return AssetClass::PrivateRange;
        if (b[0] == 172 && b[1] >= 16 && b[1] <= 31) return AssetClass::PrivateRange;
        if (b[0] == 192 && b[1] == 168) return AssetClass::PrivateRange;
        return AssetClass::PublicIP;
    }
    in6_addr v6{};
    if (inet_pton(AF_INET6, h.c_str(), &v6) == 1) {
        static const in6_addr loopback = IN6ADDR_LOOPBACK_INIT;
        if (std::equal(std::begin(v6.s6_addr), std::end(v6.s6_addr), std::begin(loopback.s6_addr)))
            return AssetClass::Loopback;
        if ((v6.s6_addr[0] & 0xFE) == 0xFC) return AssetClass::PrivateRange;
        return AssetClass::PublicIP;
    }
    return AssetClass::DnsName;
}

AssetIdentifier make_asset(std::string host, std::optional<std::uint16_t> port,
                           std::optional<std::string> database_name, std::optional<std::string> scheme) {
    AssetIdentifier asset;
    asset.asset_class = classify_asset(host);
    asset.host = std::move(host);
    asset.port = port;
    asset.database_name = std::move(database_name);
    asset.scheme = std::move(scheme);
    return asset;
}

std::optional<std::uint16_t> parse_port(std::string_view text) {
    text = text::trim(text);
    if (text.empty() || text.size() > 5) return std::nullopt;
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    if (value < 1 || value > 65535) return std::nullopt;
    return static_cast<std::uint16_t>(value);
}

PairKey pair_identity(const SecretAssetPair& pair) {
    return PairKey{pair.credential.password,     pair.credential.username,     pair.asset.host,
                   pair.asset.port,              pair.secret_location.file_path, pair.secret_location.line};
}

std::vector<SecretAssetPair> merge_pairs(std::vector<SecretAssetPair> pairs) {
    std::map<PairKey, SecretAssetPair> survivors;
    for (auto& pair : pairs) {
        PairKey key = pair_identity(pair);
        auto it = survivors.find(key);
        if (it == survivors.end()) {
            survivors.emplace(std::move(key), std::move(pair));
        } else if (survivor_less(pair, it->second)) {
            it->second = std::move(pair);
        }
    }
    std::vector<SecretAssetPair> out;
    out.reserve(survivors.size());
    for (auto& [key, pair] : survivors) out.push_back(std::move(pair));
    std::sort(out.begin(), out.end(), output_less);
    return out;
}

std::optional<std::string> validate_pair(const SecretAssetPair& pair) {
    if (pair.credential.password.empty()) return "empty password";
    if (pair.asset.host.empty()) return "empty host";
    if (std::any_of(pair.asset.host.begin(), pair.asset.host.end(),
                    [](unsigned char c) { return std::isspace(c) != 0; }))
        return "host contains whitespace";
    if (pair.asset.port && *pair.asset.port == 0) return "port out of range";
    if (pair.asset.asset_class != classify_asset(pair.asset.host)) return "asset class inconsistent with host";
    if (pair.asset.asset_class == AssetClass::Placeholder) return "placeholder host";
    const bool proximity = pair.method == DetectionMethod::ProximityHeuristic;
    if (pair.similarity_score.has_value() != proximity) return "similarity score presence does not match method";
    if (proximity && *pair.similarity_score < 0.0) return "negative similarity";
    if (pair.sink_call_location.has_value() != (pair.method == DetectionMethod::DataFlow))
        return "sink call location presence does not match method";
    if (pair.secret_location.line < 1 || pair.asset_location.line < 1) return "line must be >= 1";
    return std::nullopt;
}

}  // namespace harvest
