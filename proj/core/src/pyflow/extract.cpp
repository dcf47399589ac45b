#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "harvest/connstr.hpp"
#include "harvest/pyflow/analysis.hpp"
#include "harvest/text.hpp"

namespace harvest::pyflow {

namespace {

using Kind = Value::Kind;

// Collapses `.`/`..`; nothing when the path climbs above the root.
std::optional<std::string> normalize_path(const std::string& p) {
    if (p.empty() || p.front() == '/') return std::nullopt;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= p.size()) {
        const auto slash = p.find('/', start);
        const std::string seg = p.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
        if (seg == "..") {
            if (parts.empty()) return std::nullopt;
            parts.pop_back();
        } else if (!seg.empty() && seg != ".") {
            parts.push_back(seg);
        }
        if (slash == std::string::npos) break;
        start = slash + 1;
    }
    if (parts.empty()) return std::nullopt;
    std::string out;
    for (const auto& s : parts) {
        if (!out.empty()) out += '/';
        out += s;
    }
    return out;
}

std::string dirname_of(const std::string& path) {
    const auto slash = path.rfind('/');
    return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

std::string key_path_text(const std::vector<std::string>& key_path) {
    std::string out;
    for (const auto& k : key_path) out += fmt::format("[{}]", k);
    return out.empty() ? "<root>" : out;
}

bool mentions_config(const Value& v) {
    if (v.kind == Kind::ConfigRef) return true;
    for (const auto& p : v.items) {
        if (mentions_config(p)) return true;
    }
    return false;
}

struct Resolved {
    std::string text;
    SourceLocation location;
    bool from_config = false;
    std::vector<TextOrigin> origins;

    // Definition site of a substring, when one origin covers it.
    SourceLocation location_of(std::string_view part) const {
        const auto pos = part.empty() ? std::string::npos : text.find(part);
        if (pos == std::string::npos) return location;
        for (const auto& o : origins) {
            if (o.offset <= pos && pos + part.size() <= o.offset + o.length) return o.location;
        }
        return location;
    }
};

class SinkBinder {
public:
    SinkBinder(const SinkMatch& match, ConfigResolver& configs, Diagnostics& diags)
        : match_(match), call_(match.call), spec_(match.spec), configs_(configs), diags_(diags) {}

    std::optional<SecretAssetPair> run(bool require_config) {
        bind_arguments();

        std::map<Role, Resolved> resolved;
        for (const auto& [role, value] : roles_) {
            if (auto r = resolve(value, role)) resolved[role] = std::move(*r);
        }
        std::optional<connstr::ConnStringFields> dsn_fields;
        std::optional<Resolved> dsn_source;
        auto try_dsn = [&](const Resolved& text) {
            if (dsn_fields) return;
            if (auto f = parse_dsn(text.text)) {
                dsn_fields = std::move(f);
                dsn_source = text;
            }
        };
        for (const auto& v : dsns_) {
            if (auto r = resolve(v, Role::Dsn)) try_dsn(*r);
        }
        if (auto h = resolved.find(Role::Host); h != resolved.end() && h->second.text.find("://") != std::string::npos) {
            const Resolved host_text = h->second;
            resolved.erase(h);
            try_dsn(host_text);
        }
        if (dsn_fields) {
            auto fill = [&](Role role, const std::optional<std::string>& v) {
                if (v && !v->empty() && !text::is_separator_junk(*v) && !resolved.count(role)) {
                    resolved[role] = Resolved{*v, dsn_source->location_of(*v), dsn_source->from_config, {}};
                }
            };
            fill(Role::Host, dsn_fields->host);
            fill(Role::Username, dsn_fields->username);
            fill(Role::Password, dsn_fields->password);
            fill(Role::DatabaseName, dsn_fields->database_name);
            if (dsn_fields->port) fill(Role::Port, std::to_string(*dsn_fields->port));
        }

        const bool used_config = std::any_of(resolved.begin(), resolved.end(),
                                             [](const auto& kv) { return kv.second.from_config; });
        if (require_config && !used_config) return std::nullopt;

        auto pw = resolved.find(Role::Password);
        auto host = resolved.find(Role::Host);
        if (pw == resolved.end() || host == resolved.end()) {
            report_partial(resolved);
            return std::nullopt;
        }
        if (is_placeholder(host->second.text)) {
            diags_.info("placeholder-host",
                        fmt::format("{}: host '{}' is a template placeholder", call_.callee, host->second.text),
                        call_.location);
            return std::nullopt;
        }
        if (is_placeholder(pw->second.text)) {
            diags_.info("placeholder-password", fmt::format("{}: password is a template placeholder", call_.callee),
                        call_.location);
            return std::nullopt;
        }

        SecretAssetPair pair;
        pair.kind = spec_.kind;
        std::optional<std::string> scheme;
        if (dsn_fields) {
            if (dsn_fields->kind != DatabaseKind::Unknown) pair.kind = dsn_fields->kind;
            scheme = dsn_fields->scheme;
        }
        pair.credential.password = pw->second.text;
        if (auto u = resolved.find(Role::Username); u != resolved.end()) pair.credential.username = u->second.text;
        std::optional<std::uint16_t> port;
        if (auto p = resolved.find(Role::Port); p != resolved.end()) {
            port = parse_port(p->second.text);
            if (!port) {
                diags_.info("invalid-port", fmt::format("{}: port '{}' is not in 1..65535; dropped", call_.callee, p->second.text),
                            p->second.location);
            }
        }
        std::optional<std::string> db;
        if (auto d = resolved.find(Role::DatabaseName); d != resolved.end()) db = d->second.text;
        pair.asset = make_asset(host->second.text, port, db, scheme);
        pair.secret_location = pw->second.location;
        pair.asset_location = host->second.location;
        pair.method = DetectionMethod::DataFlow;
        pair.sink_call_location = call_.location;
        return pair;
    }

private:
    void bind(Role role, const Value& v) {
        if (role == Role::Dsn) dsns_.push_back(v);
        else roles_[role] = v;
    }

    void bind_sequence(const SequenceBinding& b, const Value& v) {
        if (v.kind == Kind::List) {
            for (std::size_t i = 0; i < b.roles.size() && i < v.items.size(); ++i) bind(b.roles[i], v.items[i]);
        } else if (v.kind == Kind::Dict) {
            for (const auto& [k, x] : v.entries) {
                const std::string key = text::to_lower(k);
                if (key == "user" || key == "username") bind(Role::Username, x);
                else if (key == "password" || key == "passwd" || key == "pwd") bind(Role::Password, x);
            }
        }
    }

    void bind_keyword(const std::string& name, const Value& v) {
        if (auto it = spec_.keyword_roles.find(name); it != spec_.keyword_roles.end()) bind(it->second, v);
        for (const auto& b : spec_.sequence_roles) {
            if (b.slot.keyword && *b.slot.keyword == name) bind_sequence(b, v);
        }
    }

    void bind_positional(int pos, const Value& v) {
        if (auto it = spec_.positional_roles.find(pos); it != spec_.positional_roles.end()) bind(it->second, v);
        for (const auto& b : spec_.sequence_roles) {
            if (b.slot.position && *b.slot.position == pos) bind_sequence(b, v);
        }
    }

    void bind_arguments() {
        int pos = 0;
        bool positions_known = true;
        for (const auto& a : call_.args) {
            if (a.keyword) {
                bind_keyword(*a.keyword, a.value);
            } else if (a.double_star) {
                if (a.value.kind == Kind::Dict) {
                    for (const auto& [k, v] : a.value.entries) bind_keyword(k, v);
                } else if (a.value.kind == Kind::ConfigRef) {
                    std::string path;
                    if (const config::Node* n = configs_.node(a.value, call_.file_path, diags_, &path); n && n->is_map()) {
                        for (const auto& [k, child] : n->map) {
                            Value ref = a.value;
                            ref.key_path.push_back(k);
                            bind_keyword(k, ref);
                        }
                    }
                }
            } else if (a.star) {
                if (a.value.kind == Kind::List && positions_known) {
                    for (const auto& item : a.value.items) bind_positional(pos++, item);
                } else {
                    positions_known = false;
                }
            } else if (positions_known) {
                bind_positional(pos++, a.value);
            }
        }
    }

    std::optional<Resolved> resolve(const Value& v, Role role) {
        std::optional<Resolved> out;
        switch (v.kind) {
            case Kind::Str:
                out = Resolved{v.text, v.def, false, origins_of(v)};
                break;
            case Kind::Int:
                out = Resolved{*v.as_text(), v.def, false, {}};
                break;
            case Kind::ConfigRef:
                if (auto s = configs_.scalar(v, call_.file_path, diags_)) out = Resolved{s->text, s->location, true, {}};
                break;
            case Kind::Concat: {
                Resolved r{"", v.def, false, {}};
                for (const auto& part : v.items) {
                    if (part.kind == Kind::Str) {
                        for (auto o : origins_of(part)) {
                            o.offset += r.text.size();
                            r.origins.push_back(std::move(o));
                        }
                        r.text += part.text;
                    } else if (part.kind == Kind::ConfigRef) {
                        auto s = configs_.scalar(part, call_.file_path, diags_);
                        if (!s) return std::nullopt;
                        if (!r.from_config) r.location = s->location;
                        r.from_config = true;
                        r.origins.push_back(TextOrigin{r.text.size(), s->text.size(), s->location});
                        r.text += s->text;
                    } else {
                        return std::nullopt;
                    }
                }
                out = std::move(r);
                break;
            }
            case Kind::Env:
                env_.emplace_back(role, v.text);
                return std::nullopt;
            default:
                return std::nullopt;
        }
        if (out && (out->text.empty() || text::is_separator_junk(out->text))) return std::nullopt;
        return out;
    }

    static std::optional<connstr::ConnStringFields> parse_dsn(const std::string& s) {
        if (auto f = connstr::decompose_any(s)) return f;
        auto kv = parse_libpq_dsn(s);
        if (!kv) return std::nullopt;
        connstr::ConnStringFields f;
        f.group = connstr::RuleGroup::KeyValueFamily;
        f.kind = DatabaseKind::PostgreSQL;
        auto get = [&](std::initializer_list<const char*> keys) -> std::optional<std::string> {
            for (const char* k : keys) {
                if (auto it = kv->find(k); it != kv->end()) return it->second;
            }
            return std::nullopt;
        };
        f.host = get({"host", "hostaddr"});
        f.username = get({"user"});
        f.password = get({"password"});
        f.database_name = get({"dbname"});
        if (auto p = get({"port"})) {
            f.port = parse_port(*p);
        }
        if (!f.host && !f.password) return std::nullopt;
        return f;
    }

    void report_partial(const std::map<Role, Resolved>& resolved) {
        std::vector<std::string> have;
        for (const auto& [role, r] : resolved) have.emplace_back(to_string(role));
        std::vector<std::string> missing;
        for (Role r : {Role::Host, Role::Password}) {
            if (!resolved.count(r)) missing.emplace_back(to_string(r));
        }
        for (const auto& [role, var] : env_) {
            diags_.info("sink-env", fmt::format("{}: {} comes from environment variable {}", call_.callee, to_string(role), var),
                        call_.location);
        }
        diags_.info("sink-unresolved",
                    fmt::format("{}: resolved [{}], missing [{}]", call_.callee, fmt::join(have, ", "), fmt::join(missing, ", ")),
                    call_.location);
    }

    const SinkMatch& match_;
    const CallSite& call_;
    const SinkSpec& spec_;
    ConfigResolver& configs_;
    Diagnostics& diags_;
    std::map<Role, Value> roles_;
    std::vector<Value> dsns_;
    std::vector<std::pair<Role, std::string>> env_;
};

}  // namespace

ConfigResolver::ConfigResolver(FileReader reader, std::optional<std::string> commit_id)
    : reader_(std::move(reader)), commit_id_(std::move(commit_id)) {}

const ConfigResolver::Entry* ConfigResolver::load(const std::string& path, config::ConfigFormat format,
                                                  Diagnostics& diags) {
    const std::string key = fmt::format("{}|{}", path, config::to_string(format));
    std::unique_lock lock(mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        auto content = reader_(path);
        if (!content) return nullptr;
        auto entry = std::make_unique<Entry>();
        Diagnostics local;
        try {
            entry->tree = config::load_config(*content, format, &local);
        } catch (const config::ParseError& e) {
            entry->error = e.what();
        }
        for (auto d : local.take()) {
            if (!d.location) d.location = SourceLocation{commit_id_, path, 1, std::nullopt};
            else d.location->file_path = path;
            diags.add(d.severity, d.code, d.message, d.location);
        }
        it = cache_.emplace(key, std::move(entry)).first;
    }
    return it->second.get();
}

const config::Node* ConfigResolver::root(const Value& ref, const std::string& module_path, Diagnostics& diags,
                                         std::string* resolved_path) {
    std::vector<std::string> candidates;
    if (auto p = normalize_path(dirname_of(module_path).empty() ? ref.text : dirname_of(module_path) + "/" + ref.text)) {
        candidates.push_back(*p);
    }
    if (auto p = normalize_path(ref.text); p && std::find(candidates.begin(), candidates.end(), *p) == candidates.end()) {
        candidates.push_back(*p);
    }
    for (const auto& path : candidates) {
        const Entry* e = load(path, ref.format, diags);
        if (!e) continue;
        if (!e->tree) {
            diags.warn("config-parse-error", fmt::format("{}: {}", path, e->error),
                       SourceLocation{commit_id_, path, 1, std::nullopt});
            return nullptr;
        }
        if (resolved_path) *resolved_path = path;
        return &*e->tree;
    }
    diags.warn("config-not-found", fmt::format("configuration file '{}' not found", ref.text), ref.def);
    return nullptr;
}

const config::Node* ConfigResolver::node(const Value& ref, const std::string& module_path, Diagnostics& diags,
                                         std::string* resolved_path) {
    std::string path;
    const config::Node* tree = root(ref, module_path, diags, &path);
    if (!tree) return nullptr;
    const config::Node* n = config::lookup_node(*tree, ref.key_path);
    if (!n) {
        diags.warn("key-not-found", fmt::format("{}: no key {}", path, key_path_text(ref.key_path)), ref.def);
        return nullptr;
    }
    if (resolved_path) *resolved_path = path;
    return n;
}

std::optional<ConfigResolver::Scalar> ConfigResolver::scalar(const Value& ref, const std::string& module_path,
                                                             Diagnostics& diags) {
    std::string path;
    const config::Node* n = node(ref, module_path, diags, &path);
    if (!n || !n->is_scalar() || n->is_null) return std::nullopt;
    return Scalar{n->scalar, SourceLocation{commit_id_, path, n->line, n->column}};
}

std::optional<SecretAssetPair> extract_pair_at_sink(const SinkMatch& match, ConfigResolver& configs,
                                                    Diagnostics& diags) {
    return SinkBinder(match, configs, diags).run(false);
}

std::optional<SecretAssetPair> bridge_config(const SinkMatch& match, ConfigResolver& configs, Diagnostics& diags) {
    const bool any = std::any_of(match.call.args.begin(), match.call.args.end(), [](const CallArg& a) {
        if (mentions_config(a.value)) return true;
        return std::any_of(a.value.entries.begin(), a.value.entries.end(),
                           [](const auto& kv) { return mentions_config(kv.second); });
    });
    if (!any) return std::nullopt;
    return SinkBinder(match, configs, diags).run(true);
}

std::vector<SecretAssetPair> analyze_project(const std::vector<SourceFile>& files, const std::vector<SinkSpec>& catalog,
                                             const FileReader& reader, Diagnostics& diags,
                                             const std::optional<std::string>& commit_id, unsigned threads) {
    std::vector<SourceFile> python;
    for (const auto& f : files) {
        if (text::ends_with(f.path, ".py")) python.push_back(f);
    }
    ProjectIndex index = build_index(python, diags, commit_id, threads);
    resolve_imports(index, diags);
    ConfigResolver configs(reader, commit_id);
    std::vector<SecretAssetPair> pairs;
    for (const auto& [name, module] : index.modules) {
        for (const auto& match : find_sink_calls(index, name, catalog)) {
            if (auto pair = extract_pair_at_sink(match, configs, diags)) pairs.push_back(std::move(*pair));
        }
    }
    return pairs;
}

std::optional<std::map<std::string, std::string>> parse_libpq_dsn(std::string_view dsn) {
    std::map<std::string, std::string> out;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < dsn.size() && std::isspace(static_cast<unsigned char>(dsn[i]))) ++i;
    };
    skip_ws();
    while (i < dsn.size()) {
        const std::size_t key_start = i;
        while (i < dsn.size() && (std::isalnum(static_cast<unsigned char>(dsn[i])) || dsn[i] == '_')) ++i;
        if (i == key_start) return std::nullopt;
        std::string key(dsn.substr(key_start, i - key_start));
        skip_ws();
        if (i >= dsn.size() || dsn[i] != '=') return std::nullopt;
        ++i;
        skip_ws();
        std::string value;
        if (i < dsn.size() && dsn[i] == '\'') {
            ++i;
            bool closed = false;
            while (i < dsn.size()) {
                if (dsn[i] == '\\' && i + 1 < dsn.size()) {
                    value.push_back(dsn[i + 1]);
                    i += 2;
                    continue;
                }
                if (dsn[i] == '\'') {
                    closed = true;
                    ++i;
                    break;
                }
                value.push_back(dsn[i++]);
            }
            if (!closed) return std::nullopt;
        } else {
            while (i < dsn.size() && !std::isspace(static_cast<unsigned char>(dsn[i]))) {
                if (dsn[i] == '\\' && i + 1 < dsn.size()) ++i;
                value.push_back(dsn[i++]);
            }
        }
        out[text::to_lower(key)] = value;
        skip_ws();
    }
    if (out.empty()) return std::nullopt;
    return out;
}

}  // namespace harvest::pyflow
