#include "harvest/pyflow/sinks.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "embedded_catalogs.hpp"
#include "harvest/diagnostics.hpp"
#include "harvest/text.hpp"

namespace harvest::pyflow {

namespace {

constexpr std::array kRoleNames = {
    std::pair{Role::Username, std::string_view{"Username"}},
    std::pair{Role::Password, std::string_view{"Password"}},
    std::pair{Role::Host, std::string_view{"Host"}},
    std::pair{Role::Port, std::string_view{"Port"}},
    std::pair{Role::DatabaseName, std::string_view{"DatabaseName"}},
    std::pair{Role::Dsn, std::string_view{"Dsn"}},
};

class CatalogReader {
public:
    explicit CatalogReader(std::string_view source) : source_(source) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        const auto mark = at.Mark();
        const int line = mark.is_null() ? 0 : mark.line + 1;
        throw FatalError("invalid-catalog", fmt::format("{}:{}: {}", source_, line, msg));
    }

    [[noreturn]] void fail_line(int line, const std::string& msg) const {
        throw FatalError("invalid-catalog", fmt::format("{}:{}: {}", source_, line, msg));
    }

    std::string scalar(const YAML::Node& n, std::string_view what) const {
        if (!n.IsScalar()) fail(n, fmt::format("{} must be a scalar", what));
        return n.Scalar();
    }

    int index(const YAML::Node& n, std::string_view what) const {
        const std::string s = scalar(n, what);
        if (s.empty() || s.size() > 3 || s.find_first_not_of("0123456789") != std::string::npos) {
            fail(n, fmt::format("{} must be a non-negative argument index, got '{}'", what, s));
        }
        return std::stoi(s);
    }

    Role role(const YAML::Node& n) const {
        const std::string s = scalar(n, "role");
        auto r = parse_role(s);
        if (!r) fail(n, fmt::format("unknown role '{}'", s));
        return *r;
    }

    ArgSlot slot(const YAML::Node& n, std::string_view what) const {
        ArgSlot out;
        if (n.IsScalar()) {
            const std::string s = n.Scalar();
            if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) out.position = index(n, what);
            else out.keyword = s;
            return out;
        }
        if (!n.IsMap()) fail(n, fmt::format("{} must be an index, a name, or a map", what));
        for (const auto& kv : n) {
            const std::string key = scalar(kv.first, "key");
            if (key == "position") out.position = index(kv.second, "position");
            else if (key == "keyword") out.keyword = scalar(kv.second, "keyword");
            else if (key != "roles") fail(kv.first, fmt::format("unknown key '{}' in {}", key, what));
        }
        if (!out.position && !out.keyword) fail(n, fmt::format("{} needs a position or a keyword", what));
        return out;
    }

    std::vector<SinkSpec> entry(const YAML::Node& n) const {
        if (!n.IsMap()) fail(n, "sink entry must be a map");
        SinkSpec spec;
        std::vector<std::string> callees;
        bool have_driver = false;
        for (const auto& kv : n) {
            const std::string key = scalar(kv.first, "key");
            const YAML::Node& v = kv.second;
            if (key == "driver") {
                spec.driver = scalar(v, "driver");
                have_driver = true;
            } else if (key == "kind") {
                auto k = parse_database_kind(scalar(v, "kind"));
                if (!k) fail(v, fmt::format("unknown kind '{}'", v.Scalar()));
                spec.kind = *k;
            } else if (key == "callee") {
                if (v.IsScalar()) {
                    callees.push_back(v.Scalar());
                } else if (v.IsSequence()) {
                    for (const auto& c : v) callees.push_back(scalar(c, "callee"));
                } else {
                    fail(v, "callee must be a name or a list of names");
                }
            } else if (key == "positional") {
                if (!v.IsMap()) fail(v, "positional must be a map of index to role");
                for (const auto& p : v) {
                    const int i = index(p.first, "positional index");
                    if (!spec.positional_roles.emplace(i, role(p.second)).second) {
                        fail(p.first, fmt::format("duplicate position {}", i));
                    }
                }
            } else if (key == "keyword") {
                if (!v.IsMap()) fail(v, "keyword must be a map of name to role");
                for (const auto& p : v) {
                    const std::string name = scalar(p.first, "keyword name");
                    if (!spec.keyword_roles.emplace(name, role(p.second)).second) {
                        fail(p.first, fmt::format("duplicate keyword '{}'", name));
                    }
                }
            } else if (key == "dsn") {
                spec.dsn_role = slot(v, "dsn");
            } else if (key == "sequence") {
                if (!v.IsSequence()) fail(v, "sequence must be a list");
                for (const auto& item : v) {
                    SequenceBinding b;
                    b.slot = slot(item, "sequence");
                    const YAML::Node roles = item.IsMap() ? item["roles"] : YAML::Node();
                    if (!roles || !roles.IsSequence() || roles.size() == 0) {
                        fail(item, "sequence binding needs a non-empty roles list");
                    }
                    for (const auto& r : roles) b.roles.push_back(role(r));
                    spec.sequence_roles.push_back(std::move(b));
                }
            } else {
                fail(kv.first, fmt::format("unknown key '{}'", key));
            }
        }
        if (!have_driver || spec.driver.empty()) fail(n, "sink entry needs a driver");
        if (callees.empty()) fail(n, fmt::format("driver '{}' has no callee", spec.driver));
        if (spec.dsn_role) {
            if (spec.dsn_role->position) spec.positional_roles[*spec.dsn_role->position] = Role::Dsn;
            if (spec.dsn_role->keyword) spec.keyword_roles[*spec.dsn_role->keyword] = Role::Dsn;
        }
        std::vector<SinkSpec> out;
        for (const auto& c : callees) {
            SinkSpec s = spec;
            s.callee_path = c;
            if (auto why = validate_spec(s)) fail(n, *why);
            out.push_back(std::move(s));
        }
        return out;
    }

private:
    std::string source_;
};

}  // namespace

std::string_view to_string(Role role) {
    for (const auto& [r, name] : kRoleNames) {
        if (r == role) return name;
    }
    return "Unknown";
}

std::optional<Role> parse_role(std::string_view text) {
    for (const auto& [r, name] : kRoleNames) {
        if (name == text) return r;
    }
    return std::nullopt;
}

std::optional<std::string> validate_spec(const SinkSpec& spec) {
    if (spec.driver.empty()) return std::string("driver name is empty");
    if (spec.callee_path.empty()) return fmt::format("driver '{}' has an empty callee", spec.driver);
    std::size_t start = 0;
    while (true) {
        const auto dot = spec.callee_path.find('.', start);
        const auto seg = std::string_view(spec.callee_path).substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) return fmt::format("callee '{}' has an empty segment", spec.callee_path);
        if (seg != "*") {
            for (char c : seg) {
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
                    return fmt::format("callee '{}' has an invalid segment '{}'", spec.callee_path, seg);
                }
            }
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (spec.positional_roles.empty() && spec.keyword_roles.empty() && spec.sequence_roles.empty()) {
        return fmt::format("driver '{}' binds no roles", spec.driver);
    }
    for (const auto& [pos, role] : spec.positional_roles) {
        if (pos < 0) return fmt::format("driver '{}' has a negative position", spec.driver);
    }
    return std::nullopt;
}

std::vector<SinkSpec> load_catalog(std::string_view yaml_text, std::string_view source_name) {
    CatalogReader reader(source_name);
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        reader.fail_line(e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) reader.fail(root, "catalog must be a map with 'version' and 'sinks'");
    const YAML::Node version = root["version"];
    if (!version) reader.fail(root, "missing 'version'");
    if (reader.scalar(version, "version") != "1") reader.fail(version, fmt::format("unsupported version '{}'", version.Scalar()));
    for (const auto& kv : root) {
        const std::string key = reader.scalar(kv.first, "key");
        if (key != "version" && key != "sinks" && key != "extends") reader.fail(kv.first, fmt::format("unknown key '{}'", key));
    }

    std::vector<SinkSpec> base;
    if (const YAML::Node ext = root["extends"]) {
        const std::string name = reader.scalar(ext, "extends");
        if (name != "builtin") reader.fail(ext, fmt::format("can only extend 'builtin', not '{}'", name));
        base = builtin_catalog();
    }

    const YAML::Node sinks = root["sinks"];
    if (!sinks || !sinks.IsSequence()) reader.fail(sinks ? sinks : root, "'sinks' must be a list");
    std::vector<SinkSpec> own;
    for (const auto& entry : sinks) {
        auto specs = reader.entry(entry);
        own.insert(own.end(), std::make_move_iterator(specs.begin()), std::make_move_iterator(specs.end()));
    }
    if (own.empty() && base.empty()) reader.fail(sinks, "catalog has no sinks");

    if (base.empty()) return own;
    std::vector<SinkSpec> out;
    for (auto& s : base) {
        const bool replaced = std::any_of(own.begin(), own.end(), [&](const SinkSpec& o) { return o.driver == s.driver; });
        if (!replaced) out.push_back(std::move(s));
    }
    out.insert(out.end(), own.begin(), own.end());
    return out;
}

std::vector<SinkSpec> load_catalog_file(const std::string& path_or_name) {
    if (path_or_name == "builtin") return builtin_catalog();
    if (path_or_name == "asyncpg-legacy") return asyncpg_legacy_catalog();
    std::ifstream in(path_or_name, std::ios::binary);
    if (!in) throw FatalError("invalid-catalog", fmt::format("{}: cannot read sink catalog", path_or_name));
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_catalog(buf.str(), path_or_name);
}

const std::vector<SinkSpec>& builtin_catalog() {
    static const std::vector<SinkSpec> catalog = load_catalog(embedded::kBuiltinCatalog, "builtin.yml");
    return catalog;
}

const std::vector<SinkSpec>& asyncpg_legacy_catalog() {
    static const std::vector<SinkSpec> catalog = load_catalog(embedded::kAsyncpgLegacyCatalog, "asyncpg-legacy.yml");
    return catalog;
}

std::vector<std::string> catalog_drivers(const std::vector<SinkSpec>& catalog) {
    std::vector<std::string> out;
    for (const auto& s : catalog) {
        if (std::find(out.begin(), out.end(), s.driver) == out.end()) out.push_back(s.driver);
    }
    return out;
}

bool callee_matches(std::string_view pattern, std::string_view callee) {
    while (true) {
        const auto pd = pattern.find('.');
        const auto cd = callee.find('.');
        const auto pseg = pattern.substr(0, pd);
        const auto cseg = callee.substr(0, cd);
        if (pseg != "*" && pseg != cseg) return false;
        if (pd == std::string_view::npos || cd == std::string_view::npos) {
            return pd == std::string_view::npos && cd == std::string_view::npos;
        }
        pattern.remove_prefix(pd + 1);
        callee.remove_prefix(cd + 1);
    }
}

}  // namespace harvest::pyflow
