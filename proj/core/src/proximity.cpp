#include "harvest/proximity.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <boost/regex.hpp>
#include <fmt/format.h>

#include "harvest/diagnostics.hpp"
#include "harvest/similarity.hpp"
#include "harvest/text.hpp"

namespace harvest::proximity {

namespace {

const boost::regex& ip_regex() {
    static const boost::regex re(std::string(kIpPattern), boost::regex::perl);
    return re;
}

// Boost rejects `0-9-.` as a range; the hyphen is escaped for the same character set.
const boost::regex& dns_regex() {
    static const boost::regex re(R"(\b[A-Za-z0-9][A-Za-z0-9\-.]*\.\D{2,4}\b)", boost::regex::perl);
    return re;
}

const boost::regex& secret_regex() {
    static const boost::regex re(
        R"((?<name>[A-Za-z0-9_.\-\[\]"'$@]*(?:password|passwd|pwd|secret)[A-Za-z0-9_.\-\[\]"']*)\s*(?::=|=>|==|=|:)\s*(?:[rRbBuU]{0,2})(?<q>["'])(?<value>(?:\\.|(?!\k<q>).)*)\k<q>)",
        boost::regex::perl | boost::regex::icase);
    return re;
}

bool is_host_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

// `\D{2,4}` admits punctuation and spaces; cut the match back to hostname characters.
std::optional<std::string> trim_dns(std::string_view m) {
    std::size_t end = 0;
    while (end < m.size() && is_host_char(m[end])) ++end;
    std::string host(m.substr(0, end));
    while (!host.empty() && (host.back() == '.' || host.back() == '-')) host.pop_back();
    const auto dot = host.rfind('.');
    if (dot == std::string::npos || dot == 0) return std::nullopt;
    const std::string_view tld = std::string_view(host).substr(dot + 1);
    if (tld.size() < 2 || !std::all_of(tld.begin(), tld.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
        return std::nullopt;
    }
    if (host.find("..") != std::string::npos) return std::nullopt;
    return host;
}

std::string unescape_field(std::string_view field, std::size_t record) {
    std::string out;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] != '\\') {
            out.push_back(field[i]);
            continue;
        }
        if (i + 1 >= field.size()) throw SchemaError(record, "dangling backslash");
        switch (field[++i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: throw SchemaError(record, fmt::format("unknown escape '\\{}'", field[i]));
        }
    }
    return out;
}

std::string escape_field(std::string_view field) {
    std::string out;
    for (char c : field) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::vector<SecretFinding> ingest_secrets(std::string_view report) {
    std::vector<SecretFinding> out;
    const auto lines = text::split_lines(report);
    std::size_t first = 0;
    while (first < lines.size() && text::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) return out;
    if (text::trim(lines[first]) != kSecretsHeader) {
        throw SchemaError(first + 1, fmt::format("expected header '{}'", kSecretsHeader));
    }
    std::map<std::tuple<std::string, std::string, std::uint32_t>, std::size_t> seen;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        const std::size_t record = i + 1;
        std::string_view line = lines[i];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty() || line.front() == '#') continue;
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 5) {
            throw SchemaError(record, fmt::format("expected 5 tab-separated fields (tool, rule, path, line, value), got {}",
                                                  fields.size()));
        }
        SecretFinding f;
        f.source_tool = unescape_field(fields[0], record);
        f.rule_id = unescape_field(fields[1], record);
        f.location.file_path = unescape_field(fields[2], record);
        const std::string line_text = unescape_field(fields[3], record);
        f.value = unescape_field(fields[4], record);
        if (f.location.file_path.empty()) throw SchemaError(record, "missing path");
        if (line_text.empty()) throw SchemaError(record, "missing line");
        if (line_text.size() > 9 || line_text.find_first_not_of("0123456789") != std::string::npos ||
            std::stoul(line_text) == 0) {
            throw SchemaError(record, fmt::format("line '{}' is not a positive integer", line_text));
        }
        f.location.line = static_cast<std::uint32_t>(std::stoul(line_text));
        if (f.value.empty()) throw SchemaError(record, "missing secret value");
        auto key = std::make_tuple(f.value, f.location.file_path, f.location.line);
        if (seen.count(key)) continue;
        seen.emplace(std::move(key), out.size());
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<SecretFinding> ingest_secrets_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FatalError("invalid-secrets-report", fmt::format("{}: cannot read secrets report", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_secrets(buf.str());
}

std::string write_secrets(const std::vector<SecretFinding>& findings) {
    std::string out(kSecretsHeader);
    out.push_back('\n');
    for (const auto& f : findings) {
        out += fmt::format("{}\t{}\t{}\t{}\t{}\n", escape_field(f.source_tool), escape_field(f.rule_id),
                           escape_field(f.location.file_path), f.location.line, escape_field(f.value));
    }
    return out;
}

std::vector<SecretFinding> builtin_detect_secrets(std::string_view content, const SourceLocation& ctx) {
    std::vector<SecretFinding> out;
    const auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line(lines[i]);
        if (line.size() > 4096) continue;
        auto begin = line.cbegin();
        boost::smatch m;
        try {
            while (boost::regex_search(begin, line.cend(), m, secret_regex())) {
                const std::string value = m["value"].str();
                if (value.size() >= 4 && !is_placeholder(value) && !text::trim(value).empty()) {
                    SecretFinding f;
                    f.value = value;
                    f.location = ctx;
                    f.location.line = static_cast<std::uint32_t>(i + 1);
                    f.location.column = static_cast<std::uint32_t>(m["value"].first - line.cbegin() + 1);
                    f.rule_id = "builtin-assignment";
                    f.source_tool = "harvest";
                    out.push_back(std::move(f));
                }
                begin = m[0].second;
            }
        } catch (const std::runtime_error&) {
            continue;
        }
    }
    return out;
}

bool valid_ipv4(std::string_view s) {
    int parts = 0;
    std::size_t start = 0;
    while (true) {
        const auto dot = s.find('.', start);
        const auto octet = s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (octet.empty() || octet.size() > 3 || octet.find_first_not_of("0123456789") != std::string_view::npos) {
            return false;
        }
        if (std::stoi(std::string(octet)) > 255) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts == 4;
}

std::vector<AssetCandidate> candidate_assets(const std::vector<std::string_view>& lines, std::uint32_t secret_line,
                                             std::uint32_t window) {
    std::vector<AssetCandidate> out;
    if (lines.empty() || secret_line == 0) return out;
    const std::uint32_t lo = secret_line > window ? secret_line - window : 1;
    const std::uint32_t hi = std::min<std::uint64_t>(lines.size(), std::uint64_t{secret_line} + window);
    for (std::uint32_t n = lo; n <= hi; ++n) {
        const std::string line(lines[n - 1]);
        if (line.size() > 4096) continue;
        std::vector<std::pair<std::size_t, std::size_t>> ip_spans;
        for (boost::sregex_iterator it(line.begin(), line.end(), ip_regex()), end; it != end; ++it) {
            const std::string host = it->str();
            if (!valid_ipv4(host)) continue;
            const auto pos = static_cast<std::size_t>(it->position());
            ip_spans.emplace_back(pos, pos + host.size());
            out.push_back(AssetCandidate{host, n, static_cast<std::uint32_t>(pos + 1), CandidateKind::Ip, line});
        }
        try {
            for (boost::sregex_iterator it(line.begin(), line.end(), dns_regex()), end; it != end; ++it) {
                auto host = trim_dns(it->str());
                if (!host) continue;
                const auto pos = static_cast<std::size_t>(it->position());
                const bool inside_ip = std::any_of(ip_spans.begin(), ip_spans.end(), [&](const auto& s) {
                    return pos < s.second && pos + host->size() > s.first;
                });
                if (inside_ip) continue;
                out.push_back(AssetCandidate{*host, n, static_cast<std::uint32_t>(pos + 1), CandidateKind::Dns, line});
            }
        } catch (const std::runtime_error&) {
        }
    }
    return out;
}

DatabaseKind kind_from_text(std::string_view line) {
    const std::string lower = text::to_lower(line);
    struct Keyword {
        std::string_view word;
        DatabaseKind kind;
    };
    static constexpr Keyword kKeywords[] = {
        {"mysql", DatabaseKind::MySQL},     {"mariadb", DatabaseKind::MySQL},       {"postgres", DatabaseKind::PostgreSQL},
        {"psql", DatabaseKind::PostgreSQL}, {"pgsql", DatabaseKind::PostgreSQL},    {"mongo", DatabaseKind::MongoDB},
        {"mssql", DatabaseKind::SQLServer}, {"sqlserver", DatabaseKind::SQLServer},
    };
    std::size_t best = std::string::npos;
    DatabaseKind kind = DatabaseKind::Unknown;
    for (const auto& k : kKeywords) {
        const auto pos = lower.find(k.word);
        if (pos < best) {
            best = pos;
            kind = k.kind;
        }
    }
    return kind;
}

std::optional<SecretAssetPair> pair_by_proximity(const SecretFinding& finding,
                                                 const std::vector<std::string_view>& lines,
                                                 const ProximityOptions& options) {
    const std::uint32_t secret_line = finding.location.line;
    if (secret_line == 0 || secret_line > lines.size()) return std::nullopt;
    const std::string_view secret_text = lines[secret_line - 1];
    const auto secret_cp = text::to_code_points(secret_text);

    const AssetCandidate* best = nullptr;
    double best_score = -1.0;
    auto distance = [&](const AssetCandidate& c) {
        return c.line > secret_line ? c.line - secret_line : secret_line - c.line;
    };
    const auto candidates = candidate_assets(lines, secret_line, options.window);
    for (const auto& c : candidates) {
        if (c.host == finding.value) continue;
        const double score = similarity::jaro_winkler(secret_cp, text::to_code_points(c.line_text));
        if (!best) {
            best = &c;
            best_score = score;
            continue;
        }
        const auto key = std::make_tuple(-score, distance(c), c.line, c.column, c.host);
        const auto best_key = std::make_tuple(-best_score, distance(*best), best->line, best->column, best->host);
        if (key < best_key) {
            best = &c;
            best_score = score;
        }
    }
    if (!best || best_score < options.threshold) return std::nullopt;

    SecretAssetPair pair;
    pair.kind = kind_from_text(secret_text);
    if (pair.kind == DatabaseKind::Unknown) pair.kind = kind_from_text(best->line_text);
    pair.credential.password = finding.value;
    pair.asset = make_asset(best->host);
    pair.secret_location = finding.location;
    pair.asset_location = SourceLocation{finding.location.commit_id, finding.location.file_path, best->line, best->column};
    pair.method = DetectionMethod::ProximityHeuristic;
    pair.similarity_score = best_score;
    return pair;
}

}  // namespace harvest::proximity
