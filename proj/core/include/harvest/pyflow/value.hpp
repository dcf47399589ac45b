#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "harvest/config_tree.hpp"
#include "harvest/model.hpp"

namespace harvest::pyflow {

/// Abstract value of a Python expression.
///
/// Str, Int, Dict, List, ConfigRef and Concat are constants (see is_const).
/// The remaining kinds exist only while evaluating: they describe objects the
/// analysis follows (modules, files, config handles) without being data.
struct TextOrigin {
    std::size_t offset = 0;
    std::size_t length = 0;
    SourceLocation location;
};

struct Value {
    enum class Kind {
        Unknown,
        None,
        Str,
        Int,
        Dict,
        List,
        /// Key path into a loaded configuration file; `text` is the file path.
        ConfigRef,
        /// Flattened concatenation of Str and ConfigRef parts.
        Concat,
        /// Dotted name of a module, function or class outside the value domain.
        Symbol,
        /// `open(path)` handle or the text read from it; `text` is the path.
        File,
        /// The consuming module's directory, joined with `text`.
        ModuleDir,
        /// An environment variable; `text` is its name.
        Env,
        /// Class body or instance attributes.
        Namespace,
    };

    Kind kind = Kind::Unknown;
    std::string text;
    std::int64_t integer = 0;
    config::ConfigFormat format = config::ConfigFormat::Yaml;
    std::vector<std::string> key_path;
    /// Dict/Namespace entries in insertion order.
    std::vector<std::pair<std::string, Value>> entries;
    /// List elements or Concat parts.
    std::vector<Value> items;
    SourceLocation def;
    /// Str built by concatenation: where each character range was defined.
    /// Empty means the whole text comes from `def`.
    std::vector<TextOrigin> origins;

    static Value unknown() { return Value{}; }
    static Value none(SourceLocation at = {});
    static Value str(std::string s, SourceLocation at = {});
    static Value integer_value(std::int64_t v, SourceLocation at = {});
    static Value symbol(std::string dotted, SourceLocation at = {});
    static Value config_ref(std::string file, config::ConfigFormat format, std::vector<std::string> key_path,
                            SourceLocation at = {});

    bool is_unknown() const { return kind == Kind::Unknown; }
    bool is_primitive() const { return kind == Kind::Str || kind == Kind::Int; }
    /// Fully resolved constant: Str, Int, ConfigRef, and Dict/List/Concat of constants.
    bool is_const() const;

    const Value* find(std::string_view key) const;
    void set(std::string key, Value v);

    /// Str text or decimal Int.
    std::optional<std::string> as_text() const;
};

/// Structural equality ignoring definition sites.
bool same_value(const Value& a, const Value& b);

/// Concatenates with flattening; Str neighbours merge. Unknown if either side
/// is neither Str, Int-free text, ConfigRef nor Concat.
Value concat(const Value& a, const Value& b, const SourceLocation& at);

/// `v.origins`, or one range covering the whole text at `v.def`.
std::vector<TextOrigin> origins_of(const Value& v);

std::string describe(const Value& v);

}  // namespace harvest::pyflow
