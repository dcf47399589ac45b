#include "harvest/report.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace harvest {

namespace {

using Json = nlohmann::ordered_json;

Json location_json(const SourceLocation& loc) {
    Json j;
    j["commit_id"] = loc.commit_id ? Json(*loc.commit_id) : Json(nullptr);
    j["file_path"] = loc.file_path;
    j["line"] = loc.line;
    j["column"] = loc.column ? Json(*loc.column) : Json(nullptr);
    return j;
}

template <typename T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json pair_json(const SecretAssetPair& p) {
    Json j;
    j["kind"] = to_string(p.kind);
    j["method"] = to_string(p.method);
    j["credential"] = Json{{"username", opt(p.credential.username)}, {"password", p.credential.password}};
    Json asset;
    asset["host"] = p.asset.host;
    asset["port"] = opt(p.asset.port);
    asset["database_name"] = opt(p.asset.database_name);
    asset["scheme"] = opt(p.asset.scheme);
    asset["asset_class"] = to_string(p.asset.asset_class);
    j["asset"] = std::move(asset);
    j["secret_location"] = location_json(p.secret_location);
    j["asset_location"] = location_json(p.asset_location);
    j["similarity_score"] = opt(p.similarity_score);
    j["sink_call_location"] = p.sink_call_location ? location_json(*p.sink_call_location) : Json(nullptr);
    return j;
}

[[noreturn]] void bad(const std::string& what) { throw FatalError("invalid-report", what); }

const Json& field(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) bad(fmt::format("{}: missing '{}'", where, key));
    return obj.at(key);
}

std::string str_field(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_string()) bad(fmt::format("{}.{}: expected a string", where, key));
    return v.get<std::string>();
}

std::optional<std::string> opt_str(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) bad(fmt::format("{}.{}: expected a string or null", where, key));
    return v.get<std::string>();
}

std::optional<std::uint64_t> opt_uint(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_unsigned()) bad(fmt::format("{}.{}: expected a non-negative integer", where, key));
    return v.get<std::uint64_t>();
}

SourceLocation parse_location(const Json& j, const std::string& where) {
    SourceLocation loc;
    loc.commit_id = opt_str(j, "commit_id", where);
    loc.file_path = str_field(j, "file_path", where);
    const auto line = opt_uint(j, "line", where);
    if (!line || *line == 0 || *line > UINT32_MAX) bad(fmt::format("{}.line: expected a positive integer", where));
    loc.line = static_cast<std::uint32_t>(*line);
    if (auto col = opt_uint(j, "column", where)) loc.column = static_cast<std::uint32_t>(*col);
    return loc;
}

SecretAssetPair parse_pair(const Json& j, const std::string& where) {
    SecretAssetPair p;
    const auto kind = parse_database_kind(str_field(j, "kind", where));
    if (!kind) bad(where + ".kind: unknown database kind");
    p.kind = *kind;
    const auto method = parse_detection_method(str_field(j, "method", where));
    if (!method) bad(where + ".method: unknown detection method");
    p.method = *method;
    const Json& cred = field(j, "credential", where);
    p.credential.username = opt_str(cred, "username", where + ".credential");
    p.credential.password = str_field(cred, "password", where + ".credential");
    const Json& asset = field(j, "asset", where);
    const std::string aw = where + ".asset";
    p.asset.host = str_field(asset, "host", aw);
    if (auto port = opt_uint(asset, "port", aw)) {
        if (*port == 0 || *port > 65535) bad(aw + ".port: out of range");
        p.asset.port = static_cast<std::uint16_t>(*port);
    }
    p.asset.database_name = opt_str(asset, "database_name", aw);
    p.asset.scheme = opt_str(asset, "scheme", aw);
    const auto cls = parse_asset_class(str_field(asset, "asset_class", aw));
    if (!cls) bad(aw + ".asset_class: unknown class");
    p.asset.asset_class = *cls;
    p.secret_location = parse_location(field(j, "secret_location", where), where + ".secret_location");
    p.asset_location = parse_location(field(j, "asset_location", where), where + ".asset_location");
    const Json& score = field(j, "similarity_score", where);
    if (!score.is_null()) {
        if (!score.is_number()) bad(where + ".similarity_score: expected a number");
        p.similarity_score = score.get<double>();
    }
    const Json& sink = field(j, "sink_call_location", where);
    if (!sink.is_null()) p.sink_call_location = parse_location(sink, where + ".sink_call_location");
    return p;
}

std::string format_location(const SourceLocation& loc) {
    std::string out = fmt::format("{}:{}", loc.file_path, loc.line);
    if (loc.commit_id) out += fmt::format(" @{}", loc.commit_id->substr(0, 12));
    return out;
}

std::string format_asset(const AssetIdentifier& a) {
    std::string out = a.host;
    if (a.host.find(':') != std::string::npos && a.port) out = "[" + out + "]";
    if (a.port) out += fmt::format(":{}", *a.port);
    if (a.database_name) out += "/" + *a.database_name;
    return out;
}

std::string emit_text(const Report& report) {
    std::string out;
    std::map<std::string, std::vector<const SecretAssetPair*>> by_file;
    for (const auto& p : report.pairs) by_file[p.secret_location.file_path].push_back(&p);
    out += fmt::format("{}: {} pair(s) in {} file(s); scanned {} file(s), {} blob(s), {} commit(s)\n",
                       report.schema_version, report.pairs.size(), by_file.size(), report.scanned.files,
                       report.scanned.blobs, report.scanned.commits);
    for (const auto& [file, pairs] : by_file) {
        out += fmt::format("\n{}\n", file);
        for (const auto* p : pairs) {
            out += fmt::format("  [{}] {} {} line {}\n", to_string(p->asset.asset_class), to_string(p->kind),
                               format_asset(p->asset), p->secret_location.line);
            std::string cred = mask_secret(p->credential.password);
            if (p->credential.username) cred = *p->credential.username + " / " + cred;
            out += fmt::format("      credential  {}\n", cred);
            out += fmt::format("      asset at    {}\n", format_location(p->asset_location));
            std::string method(to_string(p->method));
            if (p->similarity_score) method += fmt::format(" (similarity {:.4f})", *p->similarity_score);
            if (p->sink_call_location) method += fmt::format(" (sink {})", format_location(*p->sink_call_location));
            out += fmt::format("      method      {}\n", method);
        }
    }
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& d : report.diagnostics) ++counts[static_cast<int>(d.severity)];
    out += fmt::format("\ndiagnostics: {} error(s), {} warning(s), {} info\n", counts[2], counts[1], counts[0]);
    for (const auto& d : report.diagnostics) {
        if (d.severity == Severity::Info) continue;
        out += fmt::format("  {} {}: {}", to_string(d.severity), d.code, d.message);
        if (d.location) out += fmt::format(" ({})", format_location(*d.location));
        out += "\n";
    }
    return out;
}

}  // namespace

std::string mask_secret(std::string_view secret) {
    if (secret.size() <= 2) return std::string(secret.size(), '*');
    std::string out(secret.size(), '*');
    out.front() = secret.front();
    out.back() = secret.back();
    return out;
}

std::string emit_report(const Report& report, ReportFormat format) {
    if (format == ReportFormat::HumanText) return emit_text(report);
    Json j;
    j["schema_version"] = report.schema_version;
    j["scanned"] = Json{{"files", report.scanned.files}, {"blobs", report.scanned.blobs},
                        {"commits", report.scanned.commits}};
    Json pairs = Json::array();
    for (const auto& p : report.pairs) pairs.push_back(pair_json(p));
    j["pairs"] = std::move(pairs);
    Json diags = Json::array();
    for (const auto& d : report.diagnostics) {
        Json dj;
        dj["severity"] = to_string(d.severity);
        dj["code"] = d.code;
        dj["message"] = d.message;
        dj["location"] = d.location ? location_json(*d.location) : Json(nullptr);
        diags.push_back(std::move(dj));
    }
    j["diagnostics"] = std::move(diags);
    return j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

Report parse_report(std::string_view json) {
    Json j;
    try {
        j = Json::parse(json.begin(), json.end());
    } catch (const nlohmann::json::parse_error& e) {
        bad(e.what());
    }
    Report r;
    r.schema_version = str_field(j, "schema_version", "report");
    if (r.schema_version != kReportSchema) bad(fmt::format("unsupported schema '{}'", r.schema_version));
    const Json& scanned = field(j, "scanned", "report");
    r.scanned.files = opt_uint(scanned, "files", "scanned").value_or(0);
    r.scanned.blobs = opt_uint(scanned, "blobs", "scanned").value_or(0);
    r.scanned.commits = opt_uint(scanned, "commits", "scanned").value_or(0);
    const Json& pairs = field(j, "pairs", "report");
    if (!pairs.is_array()) bad("report.pairs: expected an array");
    for (std::size_t i = 0; i < pairs.size(); ++i) r.pairs.push_back(parse_pair(pairs[i], fmt::format("pairs[{}]", i)));
    const Json& diags = field(j, "diagnostics", "report");
    if (!diags.is_array()) bad("report.diagnostics: expected an array");
    for (std::size_t i = 0; i < diags.size(); ++i) {
        const std::string where = fmt::format("diagnostics[{}]", i);
        Diagnostic d;
        const auto sev = parse_severity(str_field(diags[i], "severity", where));
        if (!sev) bad(where + ".severity: unknown severity");
        d.severity = *sev;
        d.code = str_field(diags[i], "code", where);
        d.message = str_field(diags[i], "message", where);
        const Json& loc = field(diags[i], "location", where);
        if (!loc.is_null()) d.location = parse_location(loc, where + ".location");
        r.diagnostics.push_back(std::move(d));
    }
    return r;
}

Report read_report_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FatalError("invalid-report", fmt::format("{}: cannot read report", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report(buf.str());
}

}  // namespace harvest
