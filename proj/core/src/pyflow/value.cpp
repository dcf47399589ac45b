#include "harvest/pyflow/value.hpp"

#include <fmt/format.h>

namespace harvest::pyflow {

Value Value::none(SourceLocation at) {
    Value v;
    v.kind = Kind::None;
    v.def = std::move(at);
    return v;
}

Value Value::str(std::string s, SourceLocation at) {
    Value v;
    v.kind = Kind::Str;
    v.text = std::move(s);
    v.def = std::move(at);
    return v;
}

Value Value::integer_value(std::int64_t i, SourceLocation at) {
    Value v;
    v.kind = Kind::Int;
    v.integer = i;
    v.def = std::move(at);
    return v;
}

Value Value::symbol(std::string dotted, SourceLocation at) {
    Value v;
    v.kind = Kind::Symbol;
    v.text = std::move(dotted);
    v.def = std::move(at);
    return v;
}

Value Value::config_ref(std::string file, config::ConfigFormat format, std::vector<std::string> key_path,
                        SourceLocation at) {
    Value v;
    v.kind = Kind::ConfigRef;
    v.text = std::move(file);
    v.format = format;
    v.key_path = std::move(key_path);
    v.def = std::move(at);
    return v;
}

bool Value::is_const() const {
    switch (kind) {
        case Kind::Str:
        case Kind::Int:
        case Kind::ConfigRef:
            return true;
        case Kind::Dict:
            for (const auto& [k, v] : entries) {
                if (!v.is_const()) return false;
            }
            return true;
        case Kind::List:
        case Kind::Concat:
            for (const auto& v : items) {
                if (!v.is_const()) return false;
            }
            return true;
        default:
            return false;
    }
}

const Value* Value::find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
        if (k == key) return &v;
    }
    return nullptr;
}

void Value::set(std::string key, Value v) {
    for (auto& [k, old] : entries) {
        if (k == key) {
            old = std::move(v);
            return;
        }
    }
    entries.emplace_back(std::move(key), std::move(v));
}

std::optional<std::string> Value::as_text() const {
    if (kind == Kind::Str) return text;
    if (kind == Kind::Int) return std::to_string(integer);
    return std::nullopt;
}

bool same_value(const Value& a, const Value& b) {
    if (a.kind != b.kind) return false;
    if (a.text != b.text || a.integer != b.integer || a.key_path != b.key_path) return false;
    if (a.kind == Value::Kind::ConfigRef && a.format != b.format) return false;
    if (a.entries.size() != b.entries.size() || a.items.size() != b.items.size()) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        if (a.entries[i].first != b.entries[i].first || !same_value(a.entries[i].second, b.entries[i].second)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        if (!same_value(a.items[i], b.items[i])) return false;
    }
    return true;
}

std::vector<TextOrigin> origins_of(const Value& v) {
    if (!v.origins.empty()) return v.origins;
    if (v.text.empty()) return {};
    return {TextOrigin{0, v.text.size(), v.def}};
}

namespace {

void append_text(Value& into, const Value& v) {
    auto merged = origins_of(into);
    for (auto o : origins_of(v)) {
        o.offset += into.text.size();
        merged.push_back(std::move(o));
    }
    into.text += v.text;
    into.origins = std::move(merged);
}

void append_part(std::vector<Value>& parts, const Value& v) {
    if (v.kind == Value::Kind::Concat) {
        for (const auto& p : v.items) append_part(parts, p);
        return;
    }
    if (v.kind == Value::Kind::Str && !parts.empty() && parts.back().kind == Value::Kind::Str) {
        append_text(parts.back(), v);
        return;
    }
    parts.push_back(v);
}

bool concatenable(const Value& v) {
    return v.kind == Value::Kind::Str || v.kind == Value::Kind::ConfigRef || v.kind == Value::Kind::Concat;
}

}  // namespace

Value concat(const Value& a, const Value& b, const SourceLocation& at) {
    if (!concatenable(a) || !concatenable(b)) return Value::unknown();
    if (a.kind == Value::Kind::Str && b.kind == Value::Kind::Str) {
        Value out = a;
        append_text(out, b);
        out.def = at;
        return out;
    }
    Value out;
    out.kind = Value::Kind::Concat;
    out.def = at;
    append_part(out.items, a);
    append_part(out.items, b);
    if (out.items.size() == 1) {
        Value single = out.items.front();
        single.def = at;
        return single;
    }
    return out;
}

std::string describe(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Unknown:
            return "?";
        case Value::Kind::None:
            return "None";
        case Value::Kind::Str:
            return fmt::format("'{}'", v.text);
        case Value::Kind::Int:
            return std::to_string(v.integer);
        case Value::Kind::Dict: {
            std::string out = "{";
            for (std::size_t i = 0; i < v.entries.size(); ++i) {
                if (i) out += ", ";
                out += fmt::format("'{}': {}", v.entries[i].first, describe(v.entries[i].second));
            }
            return out + "}";
        }
        case Value::Kind::List: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.items.size(); ++i) {
                if (i) out += ", ";
                out += describe(v.items[i]);
            }
            return out + "]";
        }
        case Value::Kind::ConfigRef: {
            std::string out = fmt::format("config({}, {})", v.text, config::to_string(v.format));
            for (const auto& k : v.key_path) out += fmt::format("[{}]", k);
            return out;
        }
        case Value::Kind::Concat: {
            std::string out;
            for (std::size_t i = 0; i < v.items.size(); ++i) {
                if (i) out += " + ";
                out += describe(v.items[i]);
            }
            return out;
        }
        case Value::Kind::Symbol:
            return "<" + v.text + ">";
        case Value::Kind::File:
            return fmt::format("file({})", v.text);
        case Value::Kind::ModuleDir:
            return fmt::format("moduledir({})", v.text);
        case Value::Kind::Env:
            return fmt::format("env({})", v.text);
        case Value::Kind::Namespace:
            return "<namespace>";
    }
    return "?";
}

}  // namespace harvest::pyflow
