#include "harvest/evaluate.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace harvest {

namespace {

using Json = nlohmann::ordered_json;

std::optional<std::string> opt_string(const Json& obj, const char* key, std::size_t record) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    if (!obj.at(key).is_string()) throw SchemaError(record, fmt::format("'{}' must be a string or null", key));
    return obj.at(key).get<std::string>();
}

std::string required_string(const Json& obj, const char* key, std::size_t record) {
    auto v = opt_string(obj, key, record);
    if (!v) throw SchemaError(record, fmt::format("missing '{}'", key));
    return *v;
}

}  // namespace

std::vector<TruthPair> parse_truth(std::string_view json) {
    Json j;
    try {
        j = Json::parse(json.begin(), json.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(0, e.what());
    }
    if (!j.is_object()) throw SchemaError(0, "expected an object");
    const auto schema = opt_string(j, "schema_version", 0);
    if (schema != std::string(kTruthSchema)) {
        throw SchemaError(0, fmt::format("expected schema_version '{}'", kTruthSchema));
    }
    if (!j.contains("pairs") || !j.at("pairs").is_array()) throw SchemaError(0, "missing 'pairs' array");
    std::vector<TruthPair> out;
    std::set<PairKey> seen;
    const Json& pairs = j.at("pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::size_t record = i + 1;
        const Json& e = pairs[i];
        if (!e.is_object()) throw SchemaError(record, "expected an object");
        TruthPair t;
        const auto kind = parse_database_kind(required_string(e, "kind", record));
        if (!kind) throw SchemaError(record, "unknown kind");
        t.kind = *kind;
        t.key.password = required_string(e, "password", record);
        if (t.key.password.empty()) throw SchemaError(record, "empty password");
        t.key.username = opt_string(e, "username", record);
        t.key.host = required_string(e, "host", record);
        if (e.contains("port") && !e.at("port").is_null()) {
            if (!e.at("port").is_number_unsigned() || e.at("port").get<std::uint64_t>() == 0 ||
                e.at("port").get<std::uint64_t>() > 65535) {
                throw SchemaError(record, "port must be an integer in [1, 65535]");
            }
            t.key.port = static_cast<std::uint16_t>(e.at("port").get<std::uint64_t>());
        }
        t.key.file_path = required_string(e, "file_path", record);
        if (!e.contains("line") || !e.at("line").is_number_unsigned() || e.at("line").get<std::uint64_t>() == 0 ||
            e.at("line").get<std::uint64_t>() > UINT32_MAX) {
            throw SchemaError(record, "line must be a positive integer");
        }
        t.key.line = static_cast<std::uint32_t>(e.at("line").get<std::uint64_t>());
        if (!seen.insert(t.key).second) throw SchemaError(record, "duplicate identity key");
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TruthPair> read_truth_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FatalError("invalid-truth", fmt::format("{}: cannot read ground truth", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_truth(buf.str());
}

std::string emit_truth(const std::vector<TruthPair>& truth) {
    Json pairs = Json::array();
    for (const auto& t : truth) {
        Json e;
        e["kind"] = to_string(t.kind);
        e["password"] = t.key.password;
        e["username"] = t.key.username ? Json(*t.key.username) : Json(nullptr);
        e["host"] = t.key.host;
        e["port"] = t.key.port ? Json(*t.key.port) : Json(nullptr);
        e["file_path"] = t.key.file_path;
        e["line"] = t.key.line;
        pairs.push_back(std::move(e));
    }
    Json j;
    j["schema_version"] = kTruthSchema;
    j["pairs"] = std::move(pairs);
    return j.dump(2) + "\n";
}

std::vector<TruthPair> truth_from_pairs(const std::vector<SecretAssetPair>& pairs) {
    std::vector<TruthPair> out;
    std::set<PairKey> seen;
    for (const auto& p : pairs) {
        auto key = pair_identity(p);
        if (seen.insert(key).second) out.push_back(TruthPair{p.kind, std::move(key)});
    }
    return out;
}

double precision(std::size_t tp, std::size_t fp) {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall(std::size_t tp, std::size_t fn) {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double f1_score(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

EvalResult evaluate(const std::vector<SecretAssetPair>& reported, const std::vector<TruthPair>& truth) {
    EvalResult result;
    std::map<PairKey, DatabaseKind> labeled;
    for (const auto& t : truth) labeled.emplace(t.key, t.kind);
    std::set<PairKey> found;
    for (const auto& p : reported) {
        auto key = pair_identity(p);
        if (!found.insert(key).second) continue;
        auto it = labeled.find(key);
        if (it != labeled.end()) {
            ++result.per_kind[it->second].tp;
            ++result.overall.tp;
        } else {
            ++result.per_kind[p.kind].fp;
            ++result.overall.fp;
        }
    }
    for (const auto& [key, kind] : labeled) {
        if (found.count(key)) continue;
        ++result.per_kind[kind].fn;
        ++result.overall.fn;
    }
    return result;
}

EvalResult evaluate(const Report& report, const std::vector<TruthPair>& truth) {
    return evaluate(report.pairs, truth);
}

std::string emit_eval(const EvalResult& result, ReportFormat format) {
    if (format == ReportFormat::Json) {
        auto metrics = [](const Metrics& m) {
            Json j;
            j["tp"] = m.tp;
            j["fp"] = m.fp;
            j["fn"] = m.fn;
            j["precision"] = m.precision();
            j["recall"] = m.recall();
            j["f1"] = m.f1();
            return j;
        };
        Json per_kind = Json::object();
        for (const auto& [kind, m] : result.per_kind) per_kind[std::string(to_string(kind))] = metrics(m);
        Json j;
        j["per_kind"] = std::move(per_kind);
        j["overall"] = metrics(result.overall);
        return j.dump(2) + "\n";
    }
    std::string out = fmt::format("{:<12} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}\n", "kind", "tp", "fp", "fn",
                                  "precision", "recall", "f1");
    auto row = [&](std::string_view name, const Metrics& m) {
        out += fmt::format("{:<12} {:>6} {:>6} {:>6} {:>9.2f} {:>9.2f} {:>9.2f}\n", name, m.tp, m.fp, m.fn,
                           m.precision(), m.recall(), m.f1());
    };
    for (const auto& [kind, m] : result.per_kind) row(to_string(kind), m);
    row("Overall", result.overall);
    return out;
}

}  // namespace harvest
