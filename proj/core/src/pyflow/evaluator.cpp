#include <algorithm>
#include <atomic>
#include <deque>
#include <limits>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "harvest/pyflow/analysis.hpp"
#include "harvest/text.hpp"

namespace harvest::pyflow {

namespace {

using Kind = Value::Kind;
using Bindings = std::map<std::string, Value>;

std::string parent_package(const Module& m) {
    if (m.is_package) return m.name;
    const auto dot = m.name.rfind('.');
    return dot == std::string::npos ? std::string() : m.name.substr(0, dot);
}

std::string join_dotted(const std::string& a, const std::string& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return a + "." + b;
}

// Absolute import: sibling of the importer, then root-absolute, then a unique
// dotted-suffix match anywhere in the project.
std::optional<std::string> resolve_absolute(const ProjectIndex& index, const Module& from, const std::string& name) {
    const std::string pkg = parent_package(from);
    if (!pkg.empty()) {
        const std::string sibling = join_dotted(pkg, name);
        if (index.modules.count(sibling)) return sibling;
    }
    if (index.modules.count(name)) return name;
    std::optional<std::string> found;
    const std::string suffix = "." + name;
    for (const auto& [mod, tree] : index.modules) {
        if (text::ends_with(mod, suffix)) {
            if (found) return std::nullopt;
            found = mod;
        }
    }
    return found;
}

std::optional<std::string> resolve_relative(const ProjectIndex& index, const Module& from, int level,
                                            const std::string& name) {
    std::string base = parent_package(from);
    for (int i = 1; i < level; ++i) {
        const auto dot = base.rfind('.');
        if (base.empty()) return std::nullopt;
        base = dot == std::string::npos ? std::string() : base.substr(0, dot);
    }
    const std::string target = join_dotted(base, name);
    if (target.empty() || !index.modules.count(target)) return std::nullopt;
    return target;
}

std::optional<std::int64_t> parse_python_int(std::string_view s) {
    std::string digits;
    for (char c : s) {
        if (c != '_') digits.push_back(c);
    }
    int base = 10;
    std::string_view body = digits;
    if (body.size() > 2 && body[0] == '0' && std::isalpha(static_cast<unsigned char>(body[1]))) {
        const char p = static_cast<char>(std::tolower(static_cast<unsigned char>(body[1])));
        base = p == 'x' ? 16 : p == 'o' ? 8 : p == 'b' ? 2 : 0;
        if (base == 0) return std::nullopt;
        body.remove_prefix(2);
    } else if (body.size() > 1 && body[0] == '0' && body.find_first_not_of('0') != std::string_view::npos) {
        return std::nullopt;
    }
    if (body.empty()) return std::nullopt;
    std::int64_t v = 0;
    for (char c : body) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else return std::nullopt;
        if (d >= base) return std::nullopt;
        if (v > (std::numeric_limits<std::int64_t>::max() - d) / base) return std::nullopt;
        v = v * base + d;
    }
    return v;
}

std::string path_join(const std::string& a, const std::string& b) {
    if (!b.empty() && b.front() == '/') return b;
    if (a.empty()) return b;
    if (b.empty()) return a;
    return text::ends_with(a, "/") ? a + b : a + "/" + b;
}

std::string path_dirname(const std::string& p) {
    if (p.empty() || p == "." ) return "..";
    if (p == ".." || text::ends_with(p, "/..")) return p + "/..";
    const auto slash = p.rfind('/');
    return slash == std::string::npos ? std::string() : p.substr(0, slash);
}

std::optional<bool> truthiness(const Value& v) {
    switch (v.kind) {
        case Kind::None:
            return false;
        case Kind::Str:
            return !v.text.empty();
        case Kind::Int:
            return v.integer != 0;
        case Kind::Dict:
            return !v.entries.empty();
        case Kind::List:
            return !v.items.empty();
        default:
            return std::nullopt;
    }
}

// Converts a value to a string part as `str()` would; Unknown when not foldable.
Value text_part(const Value& v) {
    switch (v.kind) {
        case Kind::Str:
        case Kind::ConfigRef:
        case Kind::Concat:
            return v;
        case Kind::Int:
            return Value::str(std::to_string(v.integer), v.def);
        default:
            return Value::unknown();
    }
}

Value fold_parts(const std::vector<Value>& parts, const SourceLocation& at) {
    Value acc = Value::str("", at);
    for (const auto& p : parts) {
        Value t = text_part(p);
        if (t.is_unknown()) return Value::unknown();
        acc = concat(acc, t, at);
        if (acc.is_unknown()) return acc;
    }
    acc.def = at;
    return acc;
}

struct Scope {
    Bindings vars;
    Scope* parent = nullptr;
    std::string qual;
    bool is_class = false;
};

struct PendingFunction {
    const Stmt* def = nullptr;
    std::vector<std::optional<Value>> defaults;
    Scope* parent = nullptr;
    std::string qual;
    std::shared_ptr<Value> self;
};

class ModuleEvaluator {
public:
    ModuleEvaluator(const ProjectIndex& index, const Module& module, Diagnostics& diags)
        : index_(index), module_(module), diags_(diags) {}

    ModuleAnalysis run(Bindings& exports) {
        Scope& top = new_scope(nullptr, module_.name);
        current_ = &top;
        std::vector<PendingFunction> pending;
        pending_ = &pending;
        exec_block(module_.body);
        collect_facts(top);
        run_pending(pending);
        exports.clear();
        for (const auto& [name, v] : top.vars) {
            if (!v.is_unknown()) exports.emplace(name, v);
        }
        std::stable_sort(calls_.begin(), calls_.end(), [](const CallSite& a, const CallSite& b) {
            return std::tie(a.location.line, a.location.column) < std::tie(b.location.line, b.location.column);
        });
        return ModuleAnalysis{std::move(facts_), std::move(calls_)};
    }

private:
    Scope& new_scope(Scope* parent, std::string qual) {
        scopes_.emplace_back();
        Scope& s = scopes_.back();
        s.parent = parent;
        s.qual = std::move(qual);
        return s;
    }

    SourceLocation loc(std::uint32_t line, std::uint32_t column) const {
        return SourceLocation{index_.commit_id, module_.path, line, column};
    }
    SourceLocation loc(const Expr& e) const { return loc(e.line, e.column); }

    void collect_facts(const Scope& scope) {
        for (const auto& [name, v] : scope.vars) {
            if (v.is_const()) facts_.push_back(FlowFact{scope.qual + "." + name, v, v.def});
        }
    }

    void run_pending(std::vector<PendingFunction>& pending) {
        // __init__ first so instance attributes it assigns are visible to sibling methods.
        std::stable_partition(pending.begin(), pending.end(),
                              [](const PendingFunction& p) { return p.self && p.def->name == "__init__"; });
        for (auto& p : pending) run_function(p);
    }

    void run_function(PendingFunction& fn) {
        Scope& scope = new_scope(fn.parent, fn.qual);
        const Stmt& def = *fn.def;
        for (std::size_t i = 0; i < def.params.size(); ++i) {
            const Param& p = def.params[i];
            Value v = Value::unknown();
            if (i == 0 && fn.self) v = *fn.self;
            else if (fn.defaults[i] && fn.defaults[i]->is_const()) v = *fn.defaults[i];
            scope.vars[p.name] = v;
        }
        Scope* saved_scope = current_;
        auto* saved_pending = pending_;
        std::vector<PendingFunction> nested;
        current_ = &scope;
        pending_ = &nested;
        exec_block(def.body);
        collect_facts(scope);
        if (fn.self && !def.params.empty()) {
            const Value& after = scope.vars[def.params.front().name];
            if (after.kind == Kind::Namespace) *fn.self = after;
        }
        run_pending(nested);
        current_ = saved_scope;
        pending_ = saved_pending;
    }

    // ------------------------------------------------------------ names

    const Value* lookup(const std::string& name) const {
        for (const Scope* s = current_; s; s = s->parent) {
            if (s->is_class && s != current_) continue;
            auto it = s->vars.find(name);
            if (it != s->vars.end()) return &it->second;
        }
        return nullptr;
    }

    void bind(const std::string& name, Value v) { current_->vars[name] = std::move(v); }

    Value name_value(const Expr& e) {
        if (const Value* v = lookup(e.text)) return *v;
        if (e.text == "__file__") {
            Value v;
            v.kind = Kind::ModuleDir;
            const auto slash = module_.path.rfind('/');
            v.text = slash == std::string::npos ? module_.path : module_.path.substr(slash + 1);
            v.def = loc(e);
            return v;
        }
        return Value::symbol(e.text, loc(e));
    }

    // ------------------------------------------------------------ imports

    void note_external(const std::string& module) {
        if (reported_.insert(module).second) {
            diags_.info("external-module", fmt::format("'{}' is not part of the scanned project", module),
                        loc(current_line_, 1));
        }
    }

    void exec_import(const Stmt& s) {
        for (const auto& alias : s.names) {
            if (alias.asname) {
                auto resolved = resolve_absolute(index_, module_, alias.name);
                bind(*alias.asname, Value::symbol(resolved.value_or(alias.name), loc(s.line, s.column)));
                continue;
            }
            const std::string top = alias.name.substr(0, alias.name.find('.'));
            auto resolved = resolve_absolute(index_, module_, top);
            bind(top, Value::symbol(resolved.value_or(top), loc(s.line, s.column)));
        }
    }

    void exec_import_from(const Stmt& s) {
        std::optional<std::string> target;
        if (s.level > 0) {
            target = resolve_relative(index_, module_, s.level, s.module);
            if (!target) {
                diags_.warn("unresolved-import",
                            fmt::format("relative import '{}{}' does not resolve", std::string(s.level, '.'), s.module),
                            loc(s.line, s.column));
                for (const auto& alias : s.names) bind(alias.asname.value_or(alias.name), Value::unknown());
                return;
            }
        } else {
            target = resolve_absolute(index_, module_, s.module);
        }

        if (!target) {
            note_external(s.module);
            for (const auto& alias : s.names) {
                bind(alias.asname.value_or(alias.name), Value::symbol(join_dotted(s.module, alias.name), loc(s.line, s.column)));
            }
            return;
        }

        const auto ex = index_.exports.find(*target);
        if (s.star) {
            if (ex == index_.exports.end()) return;
            std::optional<std::set<std::string>> all;
            if (auto a = ex->second.find("__all__"); a != ex->second.end() && a->second.kind == Kind::List) {
                all.emplace();
                for (const auto& item : a->second.items) {
                    if (item.kind == Kind::Str) all->insert(item.text);
                }
            }
            for (const auto& [name, v] : ex->second) {
                if (all ? !all->count(name) : text::starts_with(name, "_")) continue;
                bind(name, v);
            }
            return;
        }
        for (const auto& alias : s.names) {
            const std::string local = alias.asname.value_or(alias.name);
            if (ex != index_.exports.end()) {
                if (auto it = ex->second.find(alias.name); it != ex->second.end()) {
                    bind(local, it->second);
                    continue;
                }
            }
            bind(local, Value::symbol(join_dotted(*target, alias.name), loc(s.line, s.column)));
        }
    }

    // ------------------------------------------------------------ statements

    void exec_block(const std::vector<Stmt>& body) {
        for (const auto& s : body) exec(s);
    }

    void exec(const Stmt& s) {
        current_line_ = s.line;
        switch (s.kind) {
            case StmtKind::Import:
                exec_import(s);
                break;
            case StmtKind::ImportFrom:
                exec_import_from(s);
                break;
            case StmtKind::Assign: {
                Value v = eval(*s.value);
                for (const auto& t : s.targets) assign(*t, v);
                break;
            }
            case StmtKind::AugAssign: {
                const Expr& t = *s.targets.front();
                Value rhs = eval(*s.value);
                Value lhs = t.kind == ExprKind::Name || t.kind == ExprKind::Attribute || t.kind == ExprKind::Subscript
                                ? eval(t)
                                : Value::unknown();
                assign(t, binary(s.op, lhs, rhs, loc(s.line, s.column)));
                break;
            }
            case StmtKind::AnnAssign:
                if (s.value) assign(*s.targets.front(), eval(*s.value));
                break;
            case StmtKind::ExprStmt:
                if (s.value) {
                    Value result = eval(*s.value);
                    apply_mutation(*s.value);
                    (void)result;
                }
                break;
            case StmtKind::Return:
                if (s.value) (void)eval(*s.value);
                break;
            case StmtKind::FunctionDef:
                exec_function_def(s);
                break;
            case StmtKind::ClassDef:
                exec_class_def(s);
                break;
            case StmtKind::With:
                for (const auto& item : s.with_items) {
                    Value v = eval(*item.context);
                    if (item.target) assign(*item.target, v);
                }
                exec_block(s.body);
                break;
            case StmtKind::Compound:
                for (const auto& c : s.clauses) {
                    for (const auto& h : c.header) (void)eval(*h);
                    for (const auto& t : c.targets) assign(*t, Value::unknown());
                    exec_block(c.body);
                }
                break;
            case StmtKind::Delete:
                for (const auto& t : s.targets) {
                    if (t->kind == ExprKind::Name) bind(t->text, Value::unknown());
                    else if (t->kind == ExprKind::Subscript) assign(*t, Value::unknown());
                }
                break;
            case StmtKind::Global:
            case StmtKind::Pass:
            case StmtKind::Opaque:
                break;
        }
    }

    void exec_function_def(const Stmt& s) {
        for (const auto& d : s.decorators) (void)eval(*d);
        PendingFunction fn;
        fn.def = &s;
        fn.parent = current_;
        while (fn.parent->is_class) fn.parent = fn.parent->parent;
        fn.qual = current_->qual + "." + s.name;
        for (const auto& p : s.params) {
            fn.defaults.push_back(p.default_value ? std::optional<Value>(eval(*p.default_value)) : std::nullopt);
        }
        if (current_->is_class && current_self_ && !s.params.empty() && !s.params.front().star &&
            !s.params.front().double_star) {
            const bool is_static = std::any_of(s.decorators.begin(), s.decorators.end(), [](const ExprPtr& d) {
                return d->kind == ExprKind::Name && d->text == "staticmethod";
            });
            if (!is_static) fn.self = current_self_;
        }
        pending_->push_back(std::move(fn));
        bind(s.name, Value::symbol(join_dotted(current_->qual, s.name), loc(s.line, s.column)));
    }

    void exec_class_def(const Stmt& s) {
        for (const auto& d : s.decorators) (void)eval(*d);
        Value ns;
        ns.kind = Kind::Namespace;
        ns.def = loc(s.line, s.column);
        for (const auto& b : s.bases) {
            Value base = b.value ? eval(*b.value) : Value::unknown();
            if (!b.keyword && base.kind == Kind::Namespace) {
                for (const auto& [k, v] : base.entries) ns.set(k, v);
            }
        }
        Scope& cls = new_scope(current_, current_->qual + "." + s.name);
        cls.is_class = true;
        for (const auto& [k, v] : ns.entries) cls.vars[k] = v;
        auto self = std::make_shared<Value>();
        Scope* saved = current_;
        auto saved_self = current_self_;
        current_ = &cls;
        current_self_ = self;
        exec_block(s.body);
        current_ = saved;
        current_self_ = saved_self;
        for (const auto& [k, v] : cls.vars) {
            if (!v.is_unknown()) ns.set(k, v);
        }
        *self = ns;
        bind(s.name, ns);
    }

    // `d.update(...)` on a known dict.
    void apply_mutation(const Expr& e) {
        if (e.kind != ExprKind::Call || e.items.front()->kind != ExprKind::Attribute) return;
        const Expr& attr = *e.items.front();
        const Expr& base = *attr.items.front();
        if (base.kind != ExprKind::Name || (attr.text != "update" && attr.text != "setdefault")) return;
        Value* target = nullptr;
        for (Scope* s = current_; s && !target; s = s->parent) {
            auto it = s->vars.find(base.text);
            if (it != s->vars.end()) target = &it->second;
        }
        if (!target || target->kind != Kind::Dict) return;
        Value updated = *target;
        bool known = true;
        if (attr.text == "setdefault") {
            if (e.args.empty() || e.args[0].keyword || e.args[0].star || e.args[0].double_star) return;
            auto key = eval(*e.args[0].value).as_text();
            if (!key) {
                bind(base.text, Value::unknown());
                return;
            }
            if (!updated.find(*key)) {
                Value dv = e.args.size() > 1 ? eval(*e.args[1].value) : Value::none(loc(e));
                updated.set(*key, dv);
            }
            bind(base.text, updated);
            return;
        }
        for (const auto& a : e.args) {
            Value v = eval(*a.value);
            if (a.keyword) {
                updated.set(*a.keyword, v);
            } else if (!a.star && v.kind == Kind::Dict) {
                for (const auto& [k, x] : v.entries) updated.set(k, x);
            } else {
                known = false;
            }
        }
        bind(base.text, known ? updated : Value::unknown());
    }

    // ------------------------------------------------------------ assignment

    void assign(const Expr& target, const Value& v) {
        switch (target.kind) {
            case ExprKind::Name:
                bind(target.text, v);
                return;
            case ExprKind::Tuple:
            case ExprKind::List: {
                const bool starred = std::any_of(target.items.begin(), target.items.end(),
                                                 [](const ExprPtr& t) { return t->kind == ExprKind::Starred; });
                const bool spread = v.kind == Kind::List && !starred && v.items.size() == target.items.size();
                for (std::size_t i = 0; i < target.items.size(); ++i) {
                    assign(*target.items[i], spread ? v.items[i] : Value::unknown());
                }
                return;
            }
            case ExprKind::Starred:
                assign(*target.items.front(), Value::unknown());
                return;
            case ExprKind::Subscript:
                assign_subscript(target, v);
                return;
            case ExprKind::Attribute:
                assign_attribute(target, v);
                return;
            default:
                (void)eval(target);
        }
    }

    Value* mutable_name(const std::string& name) {
        for (Scope* s = current_; s; s = s->parent) {
            auto it = s->vars.find(name);
            if (it != s->vars.end()) return &it->second;
        }
        return nullptr;
    }

    void assign_subscript(const Expr& target, const Value& v) {
        const Expr& base = *target.items[0];
        Value key = eval(*target.items[1]);
        if (base.kind != ExprKind::Name) {
            (void)eval(base);
            return;
        }
        Value* existing = mutable_name(base.text);
        if (!existing || existing->kind != Kind::Dict) return;
        Value updated = *existing;
        auto k = key.as_text();
        if (!k) {
            bind(base.text, Value::unknown());
            return;
        }
        updated.set(*k, v);
        bind(base.text, updated);
    }

    void assign_attribute(const Expr& target, const Value& v) {
        const Expr& base = *target.items[0];
        if (base.kind != ExprKind::Name) {
            (void)eval(base);
            return;
        }
        Value* existing = mutable_name(base.text);
        if (!existing || existing->kind != Kind::Namespace) return;
        Value updated = *existing;
        updated.set(target.text, v);
        bind(base.text, updated);
    }

    // ------------------------------------------------------------ expressions

    Value eval(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Name:
                return name_value(e);
            case ExprKind::Str:
                return Value::str(e.text, loc(e));
            case ExprKind::Num: {
                auto i = parse_python_int(e.text);
                return i ? Value::integer_value(*i, loc(e)) : Value::unknown();
            }
            case ExprKind::Constant:
                return e.text == "None" ? Value::none(loc(e)) : Value::unknown();
            case ExprKind::JoinedStr: {
                std::vector<Value> parts;
                bool ok = true;
                for (const auto& item : e.items) {
                    Value p = eval(*item);
                    if (p.is_unknown()) ok = false;
                    parts.push_back(std::move(p));
                }
                return ok ? fold_parts(parts, loc(e)) : Value::unknown();
            }
            case ExprKind::FormattedValue: {
                Value inner = eval(*e.items.front());
                if (!e.spec.empty() || (!e.text.empty() && e.text != "s")) return Value::unknown();
                return text_part(inner);
            }
            case ExprKind::Attribute:
                return attribute(eval(*e.items.front()), e.text, loc(e));
            case ExprKind::Subscript:
                return subscript(eval(*e.items[0]), eval(*e.items[1]), loc(e));
            case ExprKind::Call:
                return eval_call(e);
            case ExprKind::BinOp:
                return binary(e.text, eval(*e.items[0]), eval(*e.items[1]), loc(e));
            case ExprKind::UnaryOp: {
                Value v = eval(*e.items.front());
                if (e.text == "-" && v.kind == Kind::Int && v.integer != std::numeric_limits<std::int64_t>::min()) {
                    return Value::integer_value(-v.integer, loc(e));
                }
                if (e.text == "+" && v.kind == Kind::Int) return v;
                return Value::unknown();
            }
            case ExprKind::BoolOp: {
                const bool is_or = e.text == "or";
                for (std::size_t i = 0; i < e.items.size(); ++i) {
                    Value v = eval(*e.items[i]);
                    if (i + 1 == e.items.size()) return v;
                    auto t = truthiness(v);
                    if (!t) {
                        for (std::size_t j = i + 1; j < e.items.size(); ++j) (void)eval(*e.items[j]);
                        return Value::unknown();
                    }
                    if (*t == is_or) return v;
                }
                return Value::unknown();
            }
            case ExprKind::Compare:
                for (const auto& item : e.items) (void)eval(*item);
                return Value::unknown();
            case ExprKind::IfExp: {
                auto t = truthiness(eval(*e.items[1]));
                Value body = eval(*e.items[0]);
                Value orelse = eval(*e.items[2]);
                if (!t) return Value::unknown();
                return *t ? body : orelse;
            }
            case ExprKind::Dict:
                return dict_display(e);
            case ExprKind::List:
            case ExprKind::Tuple: {
                Value out;
                out.kind = Kind::List;
                out.def = loc(e);
                bool ok = true;
                for (const auto& item : e.items) {
                    if (item->kind == ExprKind::Starred) {
                        Value inner = eval(*item->items.front());
                        if (inner.kind == Kind::List) out.items.insert(out.items.end(), inner.items.begin(), inner.items.end());
                        else ok = false;
                        continue;
                    }
                    out.items.push_back(eval(*item));
                }
                return ok ? out : Value::unknown();
            }
            case ExprKind::NamedExpr: {
                Value v = eval(*e.items[1]);
                assign(*e.items[0], v);
                return v;
            }
            case ExprKind::Set:
            case ExprKind::Starred:
            case ExprKind::Opaque:
                for (const auto& item : e.items) (void)eval(*item);
                for (const auto& a : e.args) (void)eval(*a.value);
                return Value::unknown();
        }
        return Value::unknown();
    }

    Value dict_display(const Expr& e) {
        Value out;
        out.kind = Kind::Dict;
        out.def = loc(e);
        bool ok = true;
        for (const auto& item : e.dict_items) {
            Value v = eval(*item.value);
            if (!item.key) {
                if (v.kind == Kind::Dict) {
                    for (const auto& [k, x] : v.entries) out.set(k, x);
                } else {
                    ok = false;
                }
                continue;
            }
            auto k = eval(*item.key).as_text();
            if (!k) {
                ok = false;
                continue;
            }
            out.set(*k, std::move(v));
        }
        return ok ? out : Value::unknown();
    }

    Value attribute(const Value& base, const std::string& name, const SourceLocation& at) {
        switch (base.kind) {
            case Kind::Symbol: {
                const std::string path = join_dotted(base.text, name);
                if (auto ex = index_.exports.find(base.text); ex != index_.exports.end()) {
                    if (auto it = ex->second.find(name); it != ex->second.end()) return it->second;
                }
                return Value::symbol(path, at);
            }
            case Kind::Namespace:
                if (const Value* v = base.find(name)) return *v;
                return Value::unknown();
            case Kind::ModuleDir:
                if (name == "parent") {
                    Value v = base;
                    v.text = path_dirname(base.text);
                    v.def = at;
                    return v;
                }
                return Value::unknown();
            default:
                return Value::unknown();
        }
    }

    Value subscript(const Value& base, const Value& index, const SourceLocation& at) {
        switch (base.kind) {
            case Kind::Dict: {
                auto k = index.as_text();
                if (!k) return Value::unknown();
                if (const Value* v = base.find(*k)) return *v;
                return Value::unknown();
            }
            case Kind::ConfigRef: {
                auto k = index.as_text();
                if (!k) return Value::unknown();
                Value out = base;
                out.key_path.push_back(*k);
                out.def = at;
                return out;
            }
            case Kind::List: {
                if (index.kind != Kind::Int) return Value::unknown();
                std::int64_t i = index.integer;
                const auto n = static_cast<std::int64_t>(base.items.size());
                if (i < 0) i += n;
                if (i < 0 || i >= n) return Value::unknown();
                return base.items[static_cast<std::size_t>(i)];
            }
            case Kind::Symbol:
                if (base.text == "os.environ" && index.kind == Kind::Str) {
                    Value v;
                    v.kind = Kind::Env;
                    v.text = index.text;
                    v.def = at;
                    return v;
                }
                return Value::unknown();
            default:
                return Value::unknown();
        }
    }

    Value binary(const std::string& op, const Value& a, const Value& b, const SourceLocation& at) {
        if (op == "+") {
            if (a.kind == Kind::Int && b.kind == Kind::Int) {
                std::int64_t r;
                if (__builtin_add_overflow(a.integer, b.integer, &r)) return Value::unknown();
                return Value::integer_value(r, at);
            }
            if (a.kind == Kind::List && b.kind == Kind::List) {
                Value out = a;
                out.items.insert(out.items.end(), b.items.begin(), b.items.end());
                out.def = at;
                return out;
            }
            return concat(a, b, at);
        }
        if (op == "-" && a.kind == Kind::Int && b.kind == Kind::Int) {
            std::int64_t r;
            if (__builtin_sub_overflow(a.integer, b.integer, &r)) return Value::unknown();
            return Value::integer_value(r, at);
        }
        if (op == "*" && a.kind == Kind::Int && b.kind == Kind::Int) {
            std::int64_t r;
            if (__builtin_mul_overflow(a.integer, b.integer, &r)) return Value::unknown();
            return Value::integer_value(r, at);
        }
        if (op == "%" && a.kind == Kind::Str) return percent_format(a.text, b, at);
        if (op == "/") {
            if ((a.kind == Kind::ModuleDir || a.kind == Kind::Str) && b.kind == Kind::Str) {
                Value out = a;
                out.text = path_join(a.text, b.text);
                out.def = at;
                return out;
            }
        }
        return Value::unknown();
    }

    Value percent_format(const std::string& f, const Value& args, const SourceLocation& at) {
        std::vector<Value> parts;
        std::vector<Value> positional;
        if (args.kind == Kind::List) positional = args.items;
        else if (args.kind != Kind::Dict) positional.push_back(args);
        std::size_t next = 0;
        std::string lit;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (f[i] != '%') {
                lit.push_back(f[i]);
                continue;
            }
            if (i + 1 >= f.size()) return Value::unknown();
            char c = f[++i];
            if (c == '%') {
                lit.push_back('%');
                continue;
            }
            Value arg;
            if (c == '(') {
                const auto close = f.find(')', i);
                if (close == std::string::npos || args.kind != Kind::Dict) return Value::unknown();
                const Value* v = args.find(f.substr(i + 1, close - i - 1));
                if (!v) return Value::unknown();
                arg = *v;
                i = close + 1;
                if (i >= f.size()) return Value::unknown();
                c = f[i];
            } else {
                if (next >= positional.size()) return Value::unknown();
                arg = positional[next++];
            }
            if (c == 's') {
                parts.push_back(Value::str(lit, at));
            } else if ((c == 'd' || c == 'i') && arg.kind == Kind::Int) {
                parts.push_back(Value::str(lit, at));
            } else {
                return Value::unknown();
            }
            lit.clear();
            parts.push_back(arg);
        }
        if (args.kind != Kind::Dict && next != positional.size()) return Value::unknown();
        parts.push_back(Value::str(lit, at));
        return fold_parts(parts, at);
    }

    Value brace_format(const std::string& f, const std::vector<CallArg>& args, const SourceLocation& at) {
        std::vector<Value> positional;
        Value named;
        named.kind = Kind::Dict;
        for (const auto& a : args) {
            if (a.keyword) named.set(*a.keyword, a.value);
            else if (a.double_star && a.value.kind == Kind::Dict) {
                for (const auto& [k, v] : a.value.entries) named.set(k, v);
            } else if (a.star && a.value.kind == Kind::List) {
                positional.insert(positional.end(), a.value.items.begin(), a.value.items.end());
            } else if (a.star || a.double_star) {
                return Value::unknown();
            } else {
                positional.push_back(a.value);
            }
        }
        std::vector<Value> parts;
        std::string lit;
        std::size_t auto_index = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const char c = f[i];
            if (c == '}') {
                if (i + 1 < f.size() && f[i + 1] == '}') {
                    lit.push_back('}');
                    ++i;
                    continue;
                }
                return Value::unknown();
            }
            if (c != '{') {
                lit.push_back(c);
                continue;
            }
            if (i + 1 < f.size() && f[i + 1] == '{') {
                lit.push_back('{');
                ++i;
                continue;
            }
            const auto close = f.find('}', i);
            if (close == std::string::npos) return Value::unknown();
            const std::string field = f.substr(i + 1, close - i - 1);
            i = close;
            Value arg;
            if (field.empty()) {
                if (auto_index >= positional.size()) return Value::unknown();
                arg = positional[auto_index++];
            } else if (field.find_first_not_of("0123456789") == std::string::npos) {
                const auto n = std::stoul(field);
                if (n >= positional.size()) return Value::unknown();
                arg = positional[n];
            } else if (std::all_of(field.begin(), field.end(), [](char ch) {
                           return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
                       })) {
                const Value* v = named.find(field);
                if (!v) return Value::unknown();
                arg = *v;
            } else {
                return Value::unknown();
            }
            parts.push_back(Value::str(lit, at));
            lit.clear();
            parts.push_back(arg);
        }
        parts.push_back(Value::str(lit, at));
        return fold_parts(parts, at);
    }

    std::vector<CallArg> eval_args(const std::vector<Argument>& args) {
        std::vector<CallArg> out;
        for (const auto& a : args) {
            CallArg c;
            c.keyword = a.keyword;
            c.star = a.star;
            c.double_star = a.double_star;
            c.value = eval(*a.value);
            c.location = loc(*a.value);
            out.push_back(std::move(c));
        }
        return out;
    }

    Value eval_call(const Expr& e) {
        const Expr& fn = *e.items.front();
        std::optional<Value> base;
        Value callee;
        if (fn.kind == ExprKind::Attribute) {
            base = eval(*fn.items.front());
            callee = attribute(*base, fn.text, loc(fn));
        } else {
            callee = eval(fn);
        }
        std::vector<CallArg> args = eval_args(e.args);
        const SourceLocation at = loc(e);
        if (callee.kind == Kind::Symbol) {
            calls_.push_back(CallSite{module_.name, module_.path, callee.text, at, args});
        }
        if (base) {
            switch (base->kind) {
                case Kind::Str:
                case Kind::Dict:
                case Kind::ConfigRef:
                case Kind::File:
                case Kind::ModuleDir:
                case Kind::List:
                    return call_method(*base, fn.text, args, at);
                default:
                    break;
            }
        }
        if (callee.kind == Kind::Symbol) return call_symbol(callee.text, args, at);
        if (callee.kind == Kind::Namespace) {
            Value instance = callee;
            instance.def = at;
            return instance;
        }
        return Value::unknown();
    }

    static bool plain(const std::vector<CallArg>& args, std::size_t n) {
        if (args.size() < n) return false;
        for (std::size_t i = 0; i < n; ++i) {
            if (args[i].keyword || args[i].star || args[i].double_star) return false;
        }
        return true;
    }

    Value call_method(const Value& base, const std::string& m, const std::vector<CallArg>& args,
                      const SourceLocation& at) {
        switch (base.kind) {
            case Kind::Str:
                if (m == "format") return brace_format(base.text, args, at);
                if (m == "join" && plain(args, 1) && args.size() == 1 && args[0].value.kind == Kind::List) {
                    std::vector<Value> parts;
                    for (std::size_t i = 0; i < args[0].value.items.size(); ++i) {
                        if (i) parts.push_back(Value::str(base.text, at));
                        const Value& item = args[0].value.items[i];
                        if (item.kind == Kind::Int) return Value::unknown();
                        parts.push_back(item);
                    }
                    return fold_parts(parts, at);
                }
                if (args.empty()) {
                    if (m == "strip") return Value::str(std::string(text::trim(base.text)), at);
                    if (m == "lower") return Value::str(text::to_lower(base.text), at);
                    if (m == "upper") {
                        std::string s = base.text;
                        for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                        return Value::str(s, at);
                    }
                    if (m == "encode" || m == "decode") return Value::str(base.text, at);
                }
                if (m == "replace" && plain(args, 2) && args.size() == 2 && args[0].value.kind == Kind::Str &&
                    args[1].value.kind == Kind::Str && !args[0].value.text.empty()) {
                    std::string s = base.text;
                    const std::string& from = args[0].value.text;
                    const std::string& to = args[1].value.text;
                    for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
                        s.replace(p, from.size(), to);
                    }
                    return Value::str(s, at);
                }
                return Value::unknown();
            case Kind::Dict:
                if (m == "get" && plain(args, 1) && args.size() <= 2) {
                    auto k = args[0].value.as_text();
                    if (!k) return Value::unknown();
                    if (const Value* v = base.find(*k)) return *v;
                    return args.size() == 2 ? args[1].value : Value::none(at);
                }
                if (m == "copy" && args.empty()) return base;
                return Value::unknown();
            case Kind::ConfigRef:
                if (m == "get" && plain(args, 1) && args.size() <= 2) {
                    auto k = args[0].value.as_text();
                    if (!k) return Value::unknown();
                    Value out = base;
                    out.key_path.push_back(*k);
                    out.def = at;
                    return out;
                }
                return Value::unknown();
            case Kind::File:
                if (m == "read" && args.empty()) return base;
                return Value::unknown();
            case Kind::ModuleDir:
                if ((m == "resolve" || m == "absolute") && args.empty()) return base;
                if (m == "joinpath") {
                    Value out = base;
                    for (const auto& a : args) {
                        if (a.value.kind != Kind::Str || a.keyword || a.star || a.double_star) return Value::unknown();
                        out.text = path_join(out.text, a.value.text);
                    }
                    out.def = at;
                    return out;
                }
                if (m == "read_text" || m == "open") {
                    Value out = base;
                    out.kind = Kind::File;
                    return out;
                }
                return Value::unknown();
            case Kind::List:
                if (m == "copy" && args.empty()) return base;
                return Value::unknown();
            default:
                return Value::unknown();
        }
    }

    Value call_symbol(const std::string& path, const std::vector<CallArg>& args, const SourceLocation& at) {
        auto first = [&]() -> const Value* {
            if (args.empty() || args[0].keyword || args[0].star || args[0].double_star) return nullptr;
            return &args[0].value;
        };
        const Value* a0 = first();

        if (path == "open" || path == "io.open" || path == "codecs.open" || path == "builtins.open") {
            if (!a0 || (a0->kind != Kind::Str && a0->kind != Kind::ModuleDir)) return Value::unknown();
            Value f;
            f.kind = Kind::File;
            f.text = a0->text;
            f.def = at;
            return f;
        }
        static const std::map<std::string, config::ConfigFormat> loaders = {
            {"yaml.safe_load", config::ConfigFormat::Yaml}, {"yaml.load", config::ConfigFormat::Yaml},
            {"yaml.full_load", config::ConfigFormat::Yaml}, {"yaml.unsafe_load", config::ConfigFormat::Yaml},
            {"json.load", config::ConfigFormat::Json},      {"json.loads", config::ConfigFormat::Json},
            {"xmltodict.parse", config::ConfigFormat::Xml},
        };
        if (auto it = loaders.find(path); it != loaders.end()) {
            if (!a0 || a0->kind != Kind::File) return Value::unknown();
            return Value::config_ref(a0->text, it->second, {}, at);
        }
        if (path == "os.path.join") {
            if (args.empty()) return Value::unknown();
            Value out;
            for (std::size_t i = 0; i < args.size(); ++i) {
                const CallArg& a = args[i];
                if (a.keyword || a.star || a.double_star) return Value::unknown();
                if (i == 0) {
                    if (a.value.kind != Kind::Str && a.value.kind != Kind::ModuleDir) return Value::unknown();
                    out = a.value;
                    continue;
                }
                if (a.value.kind != Kind::Str) return Value::unknown();
                out.text = path_join(out.text, a.value.text);
            }
            out.def = at;
            return out;
        }
        if (path == "os.path.dirname") {
            if (!a0) return Value::unknown();
            if (a0->kind == Kind::ModuleDir) {
                Value out = *a0;
                out.text = path_dirname(a0->text);
                out.def = at;
                return out;
            }
            if (a0->kind == Kind::Str) {
                const auto slash = a0->text.rfind('/');
                return Value::str(slash == std::string::npos ? std::string() : a0->text.substr(0, slash), at);
            }
            return Value::unknown();
        }
        if (path == "os.path.abspath" || path == "os.path.realpath" || path == "os.path.normpath" ||
            path == "pathlib.Path" || path == "Path" || path == "pathlib.PurePath" || path == "os.fspath") {
            if (a0 && (a0->kind == Kind::Str || a0->kind == Kind::ModuleDir)) return *a0;
            return Value::unknown();
        }
        if (path == "os.getenv" || path == "os.environ.get" || path == "getenv") {
            if (!a0 || a0->kind != Kind::Str) return Value::unknown();
            Value v;
            v.kind = Kind::Env;
            v.text = a0->text;
            v.def = at;
            return v;
        }
        if (path == "str") {
            if (args.empty()) return Value::str("", at);
            if (!a0 || args.size() != 1) return Value::unknown();
            if (a0->kind == Kind::ModuleDir) return *a0;
            Value t = text_part(*a0);
            return t;
        }
        if (path == "int") {
            if (!a0 || args.size() != 1) return Value::unknown();
            if (a0->kind == Kind::Int) return *a0;
            if (a0->kind == Kind::Str) {
                const auto t = text::trim(a0->text);
                bool neg = !t.empty() && t.front() == '-';
                auto body = neg || (!t.empty() && t.front() == '+') ? t.substr(1) : t;
                if (body.empty() || body.find_first_not_of("0123456789_") != std::string_view::npos) return Value::unknown();
                auto i = parse_python_int(body);
                if (!i) {
                    std::string stripped(body);
                    stripped.erase(0, std::min(stripped.find_first_not_of('0'), stripped.size() - 1));
                    i = parse_python_int(stripped);
                }
                if (!i) return Value::unknown();
                return Value::integer_value(neg ? -*i : *i, at);
            }
            return Value::unknown();
        }
        if (path == "dict" || path == "types.SimpleNamespace") {
            Value out;
            out.kind = path == "dict" ? Kind::Dict : Kind::Namespace;
            out.def = at;
            for (const auto& a : args) {
                if (a.keyword) {
                    out.set(*a.keyword, a.value);
                } else if ((a.double_star || !a.star) && a.value.kind == Kind::Dict) {
                    for (const auto& [k, v] : a.value.entries) out.set(k, v);
                } else {
                    return Value::unknown();
                }
            }
            return out;
        }
        if (path == "list" || path == "tuple") {
            if (args.empty()) {
                Value out;
                out.kind = Kind::List;
                out.def = at;
                return out;
            }
            if (a0 && args.size() == 1 && a0->kind == Kind::List) return *a0;
            return Value::unknown();
        }
        return Value::unknown();
    }

    const ProjectIndex& index_;
    const Module& module_;
    Diagnostics& diags_;
    std::deque<Scope> scopes_;
    Scope* current_ = nullptr;
    std::shared_ptr<Value> current_self_;
    std::vector<PendingFunction>* pending_ = nullptr;
    std::vector<CallSite> calls_;
    std::vector<FlowFact> facts_;
    std::set<std::string> reported_;
    std::uint32_t current_line_ = 1;
};

void collect_imports(const ProjectIndex& index, const Module& m, const std::vector<Stmt>& body,
                     std::set<std::string>& deps) {
    for (const auto& s : body) {
        if (s.kind == StmtKind::Import) {
            for (const auto& a : s.names) {
                // Every prefix package runs on import.
                std::string prefix;
                std::size_t start = 0;
                while (true) {
                    const auto dot = a.name.find('.', start);
                    prefix = a.name.substr(0, dot);
                    if (auto r = resolve_absolute(index, m, prefix)) deps.insert(*r);
                    if (dot == std::string::npos) break;
                    start = dot + 1;
                }
            }
        } else if (s.kind == StmtKind::ImportFrom) {
            auto r = s.level > 0 ? resolve_relative(index, m, s.level, s.module) : resolve_absolute(index, m, s.module);
            if (r) {
                deps.insert(*r);
                for (const auto& a : s.names) {
                    const std::string sub = join_dotted(*r, a.name);
                    if (index.modules.count(sub)) deps.insert(sub);
                }
            }
        }
        collect_imports(index, m, s.body, deps);
        for (const auto& c : s.clauses) collect_imports(index, m, c.body, deps);
    }
}

class Tarjan {
public:
    explicit Tarjan(const std::map<std::string, std::set<std::string>>& graph) : graph_(graph) {}

    std::vector<std::vector<std::string>> run() {
        for (const auto& [node, edges] : graph_) {
            if (!index_.count(node)) visit(node);
        }
        return std::move(sccs_);
    }

private:
    void visit(const std::string& v) {
        index_[v] = low_[v] = counter_++;
        stack_.push_back(v);
        on_stack_.insert(v);
        for (const auto& w : graph_.at(v)) {
            if (!graph_.count(w)) continue;
            if (!index_.count(w)) {
                visit(w);
                low_[v] = std::min(low_[v], low_[w]);
            } else if (on_stack_.count(w)) {
                low_[v] = std::min(low_[v], index_[w]);
            }
        }
        if (low_[v] == index_[v]) {
            std::vector<std::string> scc;
            std::string w;
            do {
                w = stack_.back();
                stack_.pop_back();
                on_stack_.erase(w);
                scc.push_back(w);
            } while (w != v);
            std::sort(scc.begin(), scc.end());
            sccs_.push_back(std::move(scc));
        }
    }

    const std::map<std::string, std::set<std::string>>& graph_;
    std::map<std::string, int> index_, low_;
    std::vector<std::string> stack_;
    std::set<std::string> on_stack_;
    std::vector<std::vector<std::string>> sccs_;
    int counter_ = 0;
};

}  // namespace

ProjectIndex build_index(const std::vector<SourceFile>& files, Diagnostics& diags,
                         const std::optional<std::string>& commit_id, unsigned threads) {
    std::vector<const SourceFile*> sorted;
    for (const auto& f : files) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](const SourceFile* a, const SourceFile* b) { return a->path < b->path; });

    std::vector<Module> parsed(sorted.size());
    std::vector<Diagnostics> local(sorted.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sorted.size(); i = next++) {
            parsed[i] = parse_module(text::decode_utf8_lossy(sorted[i]->content), sorted[i]->path, local[i], commit_id);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sorted.size())));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ProjectIndex index;
    index.commit_id = commit_id;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        diags.append(local[i]);
        const std::string name = parsed[i].name;
        if (name.empty()) continue;
        if (index.modules.count(name)) {
            diags.info("duplicate-module",
                       fmt::format("module '{}' is also defined by {}", name, index.modules.at(name).path),
                       SourceLocation{commit_id, parsed[i].path, 1, std::nullopt});
            continue;
        }
        index.modules.emplace(name, std::move(parsed[i]));
    }
    return index;
}

void resolve_imports(ProjectIndex& index, Diagnostics& diags) {
    std::map<std::string, std::set<std::string>> graph;
    for (const auto& [name, m] : index.modules) {
        std::set<std::string> deps;
        collect_imports(index, m, m.body, deps);
        graph[name] = std::move(deps);
    }
    index.exports.clear();
    index.analysis.clear();
    for (const auto& scc : Tarjan(graph).run()) {
        const bool cyclic = scc.size() > 1 || graph.at(scc.front()).count(scc.front());
        const int passes = cyclic ? 2 : 1;
        for (int pass = 0; pass < passes; ++pass) {
            const bool last = pass + 1 == passes;
            std::map<std::string, Bindings> round;
            for (const auto& name : scc) {
                Diagnostics scratch;
                ModuleEvaluator ev(index, index.modules.at(name), last ? diags : scratch);
                Bindings exports;
                ModuleAnalysis result = ev.run(exports);
                round[name] = std::move(exports);
                if (last) index.analysis[name] = std::move(result);
            }
            for (auto& [name, ex] : round) index.exports[name] = std::move(ex);
        }
    }
}

std::vector<FlowFact> propagate_constants(const ProjectIndex& index, const std::string& module) {
    auto it = index.analysis.find(module);
    if (it == index.analysis.end()) return {};
    return it->second.facts;
}

std::vector<SinkMatch> find_sink_calls(const ProjectIndex& index, const std::string& module,
                                       const std::vector<SinkSpec>& catalog) {
    std::vector<SinkMatch> out;
    auto it = index.analysis.find(module);
    if (it == index.analysis.end()) return out;
    for (const auto& call : it->second.calls) {
        for (const auto& spec : catalog) {
            if (callee_matches(spec.callee_path, call.callee)) {
                out.push_back(SinkMatch{call, spec});
                break;
            }
        }
    }
    return out;
}

}  // namespace harvest::pyflow
