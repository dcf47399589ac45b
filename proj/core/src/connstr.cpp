#include "harvest/connstr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <tuple>

#include <boost/regex.hpp>
#include <fmt/format.h>

#include "harvest/text.hpp"

namespace harvest::connstr {

namespace {

// Characters that terminate a connection string embedded in source text.
#define HV_STOP R"(\s'"\x60)"

constexpr std::string_view kHost =
    R"((?:\[[0-9A-Fa-f:.]+\]|<[A-Za-z_][A-Za-z0-9_.\-]*>|[^)" HV_STOP R"(:@/?#,;\[\]<>()\\]+))";

std::string host_port() { return fmt::format("{}(?::[0-9]+)?", kHost); }

std::string server_group() { return fmt::format("(?<server>{0}(?:,{0})*)", host_port()); }

std::string uri_pattern() {
    return fmt::format(
        R"((?<![A-Za-z0-9+.\-:/]))"
        R"((?<dbms>mysqlx|mysql|postgresql|postgres|mongodb\+srv|mongodb)(?:\+(?<dialect>[A-Za-z0-9_]+))?://)"
        R"((?:(?<credentials>(?<user>[^)" HV_STOP R"(:@/?#]*)(?::(?<password>[^)" HV_STOP R"(/?#]*))?)@)?)"
        R"({})"
        R"((?:/(?<database>[^)" HV_STOP R"(?#/;,]*))?)"
        R"((?:\?(?<query>[^)" HV_STOP R"(#]*))?)",
        server_group());
}

constexpr std::string_view kKvValue = R"((?:\{[^}\r\n]*\}|[^;'"\x60\r\n]*))";

std::string kv_pattern() {
    const std::string seg = fmt::format(
        R"((?:\s*(?:driver\s*=\s*(?<dbms>{0})|(?:server|data\s+source)\s*=\s*(?<server>{0}))"
        R"(|(?:pwd|password)\s*=\s*(?<credentials>{0})|[A-Za-z][A-Za-z0-9_]*(?:[ \t][A-Za-z0-9_]+)*\s*=\s*{0})))",
        kKvValue);
    return fmt::format(
        R"((?i)(?<![A-Za-z0-9_])(?=(?:driver|provider|server|data\s+source|database|initial\s+catalog)"
        R"(|uid|user\s+id|pwd|password|port|dsn)\s*=){0}(?:;{0})+\s*;?)",
        seg);
}

std::string jdbc_pattern() {
    return fmt::format(
        R"((?<![A-Za-z0-9_])jdbc:(?<dbms>[A-Za-z0-9]+)(?<subprotocol>(?::[A-Za-z0-9]+)*)://)"
        R"((?:(?<credentials>(?<user>[^)" HV_STOP R"(:@/?#;]*)(?::(?<password>[^)" HV_STOP R"(/?#;]*))?)@)?)"
        R"({})"
        R"((?:/(?<database>[^)" HV_STOP R"(?#/;&]*))?)"
        R"((?<params>[?;&][^)" HV_STOP R"(#]*)?)",
        server_group());
}

#undef HV_STOP

struct CompiledRules {
    std::vector<ConnStringRule> rules;
    boost::regex uri;
    boost::regex kv;
    boost::regex jdbc;
};

const CompiledRules& compiled() {
    static const CompiledRules instance = [] {
        CompiledRules c;
        c.rules.push_back(ConnStringRule{
            RuleGroup::UriFamily,
            "uri-family",
            "[scheme[+dialect]://][user[:[password]]@]host[:port][,host[:port]...][/db][?query]  "
            "schemes: mysql mysqlx postgresql postgres mongodb mongodb+srv",
            uri_pattern(),
            {DatabaseKind::MySQL, DatabaseKind::PostgreSQL, DatabaseKind::MongoDB}});
        c.rules.push_back(ConnStringRule{
            RuleGroup::KeyValueFamily,
            "odbc-oledb-key-value",
            "Key=Value; pairs (ODBC / OLE-DB): Driver={name}; Server|Data Source=host[,port]; "
            "Database|Initial Catalog=db; Uid|User ID=user; Pwd|Password=password; Port=n",
            kv_pattern(),
            {DatabaseKind::SQLServer, DatabaseKind::MySQL, DatabaseKind::PostgreSQL, DatabaseKind::GenericODBC}});
        c.rules.push_back(ConnStringRule{
            RuleGroup::Jdbc,
            "jdbc",
            "jdbc:<subprotocol>://[user:password@]host[:port][/db][?user=..&password=..|;user=..;password=..]",
            jdbc_pattern(),
            {DatabaseKind::MySQL, DatabaseKind::PostgreSQL, DatabaseKind::SQLServer, DatabaseKind::MongoDB,
             DatabaseKind::GenericJDBC}});
        c.uri = boost::regex(c.rules[0].pattern, boost::regex::perl);
        c.kv = boost::regex(c.rules[1].pattern, boost::regex::perl);
        c.jdbc = boost::regex(c.rules[2].pattern, boost::regex::perl);
        return c;
    }();
    return instance;
}

using SvMatch = boost::match_results<std::string_view::const_iterator>;

std::optional<std::string> group_text(const SvMatch& m, const char* name) {
    const auto& g = m[name];
    if (!g.matched) return std::nullopt;
    return std::string(g.first, g.second);
}

DatabaseKind kind_from_uri_scheme(std::string_view scheme) {
    if (scheme == "mysql" || scheme == "mysqlx") return DatabaseKind::MySQL;
    if (scheme == "postgres" || scheme == "postgresql") return DatabaseKind::PostgreSQL;
    if (scheme == "mongodb" || scheme == "mongodb+srv") return DatabaseKind::MongoDB;
    return DatabaseKind::Unknown;
}

std::string strip_brackets(std::string host) {
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') return host.substr(1, host.size() - 2);
    return host;
}

// Splits "h1:p1,h2,h3:p3"; the first host and port populate the fields.
void apply_server_list(std::string_view server, ConnStringFields& f) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = server.find(',', start);
        parts.push_back(server.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    const std::string_view first = parts.front();
    std::string_view host = first;
    std::optional<std::string_view> port_text;
    if (!first.empty() && first.front() == '[') {
        const auto close = first.find(']');
        host = first.substr(0, close + 1);
        if (close + 1 < first.size() && first[close + 1] == ':') port_text = first.substr(close + 2);
    } else if (const auto colon = first.rfind(':'); colon != std::string_view::npos) {
        host = first.substr(0, colon);
        port_text = first.substr(colon + 1);
    }
    f.host = strip_brackets(std::string(host));
    if (port_text) {
        f.port = parse_port(*port_text);
        if (!f.port) {
            throw ParseError(ParseErrorCode::InvalidPort, fmt::format("port '{}' not in [1, 65535]", *port_text));
        }
    }
    for (std::size_t i = 1; i < parts.size(); ++i) f.extra_hosts.emplace_back(parts[i]);
}

std::string normalize_key(std::string_view key) {
    std::string out;
    bool space = false;
    for (const char c : text::trim(key)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool braced(std::string_view v) { return v.size() >= 2 && v.front() == '{' && v.back() == '}'; }

std::vector<std::string_view> split_kv_segments(std::string_view s) {
    std::vector<std::string_view> segments;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        if (s[i] == '}' && depth > 0) --depth;
        if (s[i] == ';' && depth == 0) {
            segments.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    if (start < s.size()) segments.push_back(s.substr(start));
    return segments;
}

DatabaseKind kind_from_driver(std::string_view driver) {
    const std::string d = text::to_lower(driver);
    if (d.find("sql server") != std::string::npos || d.find("sqlserver") != std::string::npos)
        return DatabaseKind::SQLServer;
    if (d.find("mysql") != std::string::npos || d.find("mariadb") != std::string::npos) return DatabaseKind::MySQL;
    if (d.find("postgres") != std::string::npos) return DatabaseKind::PostgreSQL;
    return DatabaseKind::GenericODBC;
}

DatabaseKind kind_from_jdbc(std::string_view dbms, std::string_view subprotocol) {
    std::vector<std::string> names{text::to_lower(dbms)};
    std::size_t start = 0;
    while (start < subprotocol.size()) {
        if (subprotocol[start] == ':') ++start;
        const auto next = subprotocol.find(':', start);
        names.push_back(text::to_lower(subprotocol.substr(start, next - start)));
        if (next == std::string_view::npos) break;
        start = next;
    }
    for (const auto& n : names) {
        if (n == "mysql" || n == "mariadb") return DatabaseKind::MySQL;
        if (n == "postgresql" || n == "postgres" || n == "pgsql") return DatabaseKind::PostgreSQL;
        if (n == "sqlserver") return DatabaseKind::SQLServer;
        if (n == "mongodb") return DatabaseKind::MongoDB;
    }
    return DatabaseKind::GenericJDBC;
}

bool nonempty(const std::optional<std::string>& s) { return s && !s->empty(); }

ParsedConnString to_parsed(ConnStringFields fields, std::string_view raw) {
    if (fields.host && is_placeholder(*fields.host)) {
        throw ParseError(ParseErrorCode::PlaceholderHost, fmt::format("host '{}' is a template placeholder", *fields.host));
    }
    if (!nonempty(fields.host)) throw ParseError(ParseErrorCode::MissingServer, "connection string has no server");
    if (fields.host->find_first_of(" \t") != std::string::npos) {
        throw ParseError(ParseErrorCode::MissingServer, fmt::format("server '{}' is not a single host", *fields.host));
    }
    if (!nonempty(fields.password)) throw ParseError(ParseErrorCode::MissingPassword, "connection string has no password");
    if (is_placeholder(*fields.password)) {
        throw ParseError(ParseErrorCode::MissingPassword, "password is a template placeholder");
    }
    ParsedConnString p;
    p.kind = fields.kind;
    p.credential.username = fields.username && !fields.username->empty() ? fields.username : std::nullopt;
    p.credential.password = *fields.password;
    p.asset = make_asset(*fields.host, fields.port, fields.database_name, fields.scheme);
    p.raw = std::string(raw);
    p.span_end = raw.size();
    p.extra_hosts = std::move(fields.extra_hosts);
    return p;
}

std::string bracket_if_ipv6(const std::string& host) {
    return host.find(':') != std::string::npos ? "[" + host + "]" : host;
}

std::string kv_value(const std::string& v) {
    if (v.find(';') != std::string::npos || v != text::trim(v) || braced(v)) return "{" + v + "}";
    return v;
}

}  // namespace

std::string_view to_string(RuleGroup group) {
    switch (group) {
        case RuleGroup::UriFamily:
            return "UriFamily";
        case RuleGroup::KeyValueFamily:
            return "KeyValueFamily";
        case RuleGroup::Jdbc:
            return "Jdbc";
    }
    return "?";
}

std::string_view to_string(ParseErrorCode code) {
    switch (code) {
        case ParseErrorCode::NoMatch:
            return "no-match";
        case ParseErrorCode::InvalidPort:
            return "invalid-port";
        case ParseErrorCode::MissingServer:
            return "missing-server";
        case ParseErrorCode::MissingPassword:
            return "missing-password";
        case ParseErrorCode::PlaceholderHost:
            return "placeholder-host";
    }
    return "?";
}

const std::vector<ConnStringRule>& compile_rules() { return compiled().rules; }

ConnStringFields decompose_uri(std::string_view s) {
    SvMatch m;
    if (!boost::regex_search(s.begin(), s.end(), m, compiled().uri)) {
        throw ParseError(ParseErrorCode::NoMatch, "not a URI-family connection string");
    }
    ConnStringFields f;
    f.group = RuleGroup::UriFamily;
    const std::string dbms = *group_text(m, "dbms");
    f.kind = kind_from_uri_scheme(dbms);
    f.scheme = dbms;
    if (auto dialect = group_text(m, "dialect")) *f.scheme += "+" + *dialect;
    if (auto user = group_text(m, "user")) f.username = text::percent_decode(*user);
    if (auto pw = group_text(m, "password")) f.password = text::percent_decode(*pw);
    apply_server_list(*group_text(m, "server"), f);
    if (auto db = group_text(m, "database"); db && !db->empty()) f.database_name = text::percent_decode(*db);
    return f;
}

ConnStringFields decompose_kv(std::string_view s) {
    ConnStringFields f;
    f.group = RuleGroup::KeyValueFamily;
    bool any = false;
    bool sqlclient = false;
    std::optional<std::string> server;
    std::optional<std::string> port;
    for (const auto segment : split_kv_segments(s)) {
        const auto eq = segment.find('=');
        if (eq == std::string_view::npos) continue;
        const std::string key = normalize_key(segment.substr(0, eq));
        std::string_view raw_value = text::trim(segment.substr(eq + 1));
        std::string value(raw_value);
        if (braced(raw_value)) value = std::string(raw_value.substr(1, raw_value.size() - 2));
        any = true;
        if (key == "user id" || key == "initial catalog" || key == "data source" || key == "integrated security" ||
            key == "encrypt" || key == "trustservercertificate" || key == "multipleactiveresultsets") {
            sqlclient = true;
        }
        if (key == "driver") {
            f.driver = value;
        } else if (key == "provider") {
            if (!f.driver) f.driver = value;
        } else if (key == "server" || key == "data source" || key == "address" || key == "addr") {
            // {0}-style slots stay braced so the host classifies as a placeholder.
            server = braced(raw_value) && is_placeholder(raw_value) ? std::string(raw_value) : value;
        } else if (key == "database" || key == "initial catalog") {
            if (!value.empty()) f.database_name = value;
        } else if (key == "uid" || key == "user id") {
            f.username = value;
        } else if (key == "pwd" || key == "password") {
            f.password = value;
        } else if (key == "port") {
            port = value;
        }
    }
    if (!any) throw ParseError(ParseErrorCode::NoMatch, "not a key-value connection string");
    if (!server || server->empty()) {
        throw ParseError(ParseErrorCode::MissingServer, "neither Server nor Data Source present");
    }
    std::string_view srv = *server;
    for (const std::string_view proto : {"tcp:", "np:", "lpc:"}) {
        if (text::starts_with(text::to_lower(srv), proto)) {
            srv.remove_prefix(proto.size());
            sqlclient = true;
        }
    }
    const auto sep = srv.find_first_of(",:");
    if (sep != std::string_view::npos && !is_placeholder(srv)) {
        f.host = std::string(text::trim(srv.substr(0, sep)));
        port = std::string(text::trim(srv.substr(sep + 1)));
    } else {
        f.host = std::string(srv);
    }
    if (port) {
        f.port = parse_port(*port);
        if (!f.port) throw ParseError(ParseErrorCode::InvalidPort, fmt::format("port '{}' not in [1, 65535]", *port));
    }
    // Driver-less strings with SqlClient keywords are ADO.NET SQL Server strings.
    if (f.driver) f.kind = kind_from_driver(*f.driver);
    else f.kind = sqlclient ? DatabaseKind::SQLServer : DatabaseKind::GenericODBC;
    return f;
}

ConnStringFields decompose_jdbc(std::string_view s) {
    SvMatch m;
    if (!boost::regex_search(s.begin(), s.end(), m, compiled().jdbc)) {
        throw ParseError(ParseErrorCode::NoMatch, "not a JDBC connection string");
    }
    ConnStringFields f;
    f.group = RuleGroup::Jdbc;
    const std::string dbms = *group_text(m, "dbms");
    const std::string sub = group_text(m, "subprotocol").value_or("");
    f.kind = kind_from_jdbc(dbms, sub);
    f.scheme = "jdbc:" + dbms + sub;
    apply_server_list(*group_text(m, "server"), f);
    if (auto db = group_text(m, "database"); db && !db->empty()) f.database_name = text::percent_decode(*db);

    std::optional<std::string> q_user;
    std::optional<std::string> q_password;
    if (auto params = group_text(m, "params")) {
        const bool url_encoded = !params->empty() && params->front() == '?';
        std::size_t start = 0;
        const std::string& p = *params;
        while (start < p.size()) {
            if (p[start] == '?' || p[start] == '&' || p[start] == ';') {
                ++start;
                continue;
            }
            const auto end = p.find_first_of("&;", start);
            const std::string_view item = std::string_view(p).substr(start, end - start);
            start = end == std::string::npos ? p.size() : end;
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) continue;
            const std::string key = text::to_lower(item.substr(0, eq));
            std::string value(item.substr(eq + 1));
            if (url_encoded) value = text::percent_decode(value);
            if (key == "user" || key == "username") q_user = value;
            else if (key == "password") q_password = value;
            else if ((key == "databasename" || key == "database") && !f.database_name && !value.empty())
                f.database_name = value;
        }
    }

    const auto pre_user = group_text(m, "user");
    const auto pre_password = group_text(m, "password");
    if (pre_password && !pre_password->empty()) {
        f.username = text::percent_decode(pre_user.value_or(""));
        f.password = text::percent_decode(*pre_password);
    } else if (q_password) {
        f.credentials_in_query = true;
        f.username = q_user;
        f.password = q_password;
    } else {
        if (pre_user && !pre_user->empty()) f.username = text::percent_decode(*pre_user);
        else if (q_user) f.username = q_user;
    }
    return f;
}

std::optional<ConnStringFields> decompose_any(std::string_view s) {
    s = text::trim(s);
    for (auto* fn : {&decompose_jdbc, &decompose_uri}) {
        try {
            return fn(s);
        } catch (const ParseError& e) {
            if (e.code() != ParseErrorCode::NoMatch) return std::nullopt;
        }
    }
    SvMatch m;
    if (boost::regex_search(s.begin(), s.end(), m, compiled().kv)) {
        try {
            return decompose_kv(s);
        } catch (const ParseError&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

ParsedConnString parse_uri_connstring(std::string_view s) { return to_parsed(decompose_uri(s), s); }
ParsedConnString parse_kv_connstring(std::string_view s) { return to_parsed(decompose_kv(s), s); }
ParsedConnString parse_jdbc_connstring(std::string_view s) { return to_parsed(decompose_jdbc(s), s); }

std::string serialize(const ConnStringFields& f) {
    std::string out;
    const auto host_part = [&] {
        std::string h = f.host ? bracket_if_ipv6(*f.host) : std::string{};
        if (f.port) h += ":" + std::to_string(*f.port);
        for (const auto& extra : f.extra_hosts) h += "," + extra;
        return h;
    };
    switch (f.group) {
        case RuleGroup::UriFamily: {
            out = f.scheme.value_or("mysql") + "://";
            if (f.username || f.password) {
                out += text::percent_encode(f.username.value_or(""));
                if (f.password) out += ":" + text::percent_encode(*f.password);
                out += "@";
            }
            out += host_part();
            if (f.database_name) out += "/" + text::percent_encode(*f.database_name);
            break;
        }
        case RuleGroup::KeyValueFamily: {
            // Driver-less SQL Server strings keep the SqlClient keywords that identify them.
            const bool ado = !f.driver && f.kind == DatabaseKind::SQLServer;
            if (f.driver) out += "Driver={" + *f.driver + "};";
            out += (ado ? "Data Source=" : "Server=") + kv_value(f.host.value_or(""));
            if (f.port) out += "," + std::to_string(*f.port);
            out += ";";
            if (f.database_name) out += (ado ? "Initial Catalog=" : "Database=") + kv_value(*f.database_name) + ";";
            if (f.username) out += (ado ? "User ID=" : "Uid=") + kv_value(*f.username) + ";";
            if (f.password) out += (ado ? "Password=" : "Pwd=") + kv_value(*f.password) + ";";
            break;
        }
        case RuleGroup::Jdbc: {
            out = f.scheme.value_or("jdbc:mysql") + "://";
            const bool pre_host = !f.credentials_in_query && f.password;
            if (pre_host) {
                out += text::percent_encode(f.username.value_or("")) + ":" + text::percent_encode(*f.password) + "@";
            }
            out += host_part();
            if (f.database_name) out += "/" + text::percent_encode(*f.database_name);
            std::vector<std::string> params;
            if (!pre_host && f.username) params.push_back("user=" + text::percent_encode(*f.username));
            if (!pre_host && f.password) params.push_back("password=" + text::percent_encode(*f.password));
            for (std::size_t i = 0; i < params.size(); ++i) out += (i == 0 ? "?" : "&") + params[i];
            break;
        }
    }
    return out;
}

std::vector<SecretAssetPair> scan_text(std::string_view content, const SourceLocation& ctx, Diagnostics& diags) {
    struct Candidate {
        std::size_t begin;
        std::size_t end;
        int priority;
        RuleGroup group;
    };
    const auto& rules = compiled();
    const std::array<std::pair<const boost::regex*, RuleGroup>, 3> ordered{
        std::pair{&rules.jdbc, RuleGroup::Jdbc}, std::pair{&rules.uri, RuleGroup::UriFamily},
        std::pair{&rules.kv, RuleGroup::KeyValueFamily}};

    std::vector<SecretAssetPair> pairs;
    const auto lines = text::split_lines(content);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = lines[li];
        const bool maybe_uri = line.find("://") != std::string_view::npos;
        const bool maybe_kv = line.find('=') != std::string_view::npos && line.find(';') != std::string_view::npos;
        if (!maybe_uri && !maybe_kv) continue;

        SourceLocation loc{ctx.commit_id, ctx.file_path, static_cast<std::uint32_t>(li + 1), std::nullopt};
        std::vector<Candidate> candidates;
        for (int pr = 0; pr < static_cast<int>(ordered.size()); ++pr) {
            const auto [re, group] = ordered[static_cast<std::size_t>(pr)];
            if (group != RuleGroup::KeyValueFamily && !maybe_uri) continue;
            if (group == RuleGroup::KeyValueFamily && !maybe_kv) continue;
            try {
                boost::regex_iterator<std::string_view::const_iterator> it(line.begin(), line.end(), *re), end;
                for (; it != end; ++it) {
                    const auto& m = *it;
                    if (m.length(0) == 0) continue;
                    const auto b = static_cast<std::size_t>(m[0].first - line.begin());
                    candidates.push_back({b, b + static_cast<std::size_t>(m.length(0)), pr, group});
                }
            } catch (const std::runtime_error& e) {
                diags.warn("regex-aborted", fmt::format("{} rule aborted on this line: {}", to_string(group), e.what()),
                           loc);
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return std::tie(a.begin, a.priority) < std::tie(b.begin, b.priority);
        });
        std::size_t covered_until = 0;
        for (const auto& c : candidates) {
            if (c.begin < covered_until) continue;
            covered_until = c.end;
            const std::string_view raw = line.substr(c.begin, c.end - c.begin);
            loc.column = static_cast<std::uint32_t>(c.begin + 1);
            try {
                ParsedConnString parsed = c.group == RuleGroup::UriFamily ? parse_uri_connstring(raw)
                                          : c.group == RuleGroup::Jdbc    ? parse_jdbc_connstring(raw)
                                                                          : parse_kv_connstring(raw);
                if (!parsed.extra_hosts.empty()) {
                    std::string rest;
                    for (const auto& h : parsed.extra_hosts) rest += (rest.empty() ? "" : ",") + h;
                    diags.info("multi-host", fmt::format("additional hosts not reported: {}", rest), loc);
                }
                SecretAssetPair pair;
                pair.kind = parsed.kind;
                pair.credential = std::move(parsed.credential);
                pair.asset = std::move(parsed.asset);
                pair.secret_location = loc;
                pair.asset_location = loc;
                pair.method = DetectionMethod::PatternMatch;
                pairs.push_back(std::move(pair));
            } catch (const ParseError& e) {
                if (e.code() == ParseErrorCode::MissingPassword || e.code() == ParseErrorCode::NoMatch) continue;
                // A key-value run without a password is ordinary code, not a malformed secret.
                if (c.group == RuleGroup::KeyValueFamily && e.code() == ParseErrorCode::MissingServer) {
                    const std::string lowered = text::to_lower(raw);
                    if (lowered.find("pwd") == std::string::npos && lowered.find("password") == std::string::npos)
                        continue;
                }
                if (e.code() == ParseErrorCode::PlaceholderHost) diags.info(std::string(to_string(e.code())), e.what(), loc);
                else diags.warn(std::string(to_string(e.code())), e.what(), loc);
            }
        }
    }
    return pairs;
}

}  // namespace harvest::connstr
