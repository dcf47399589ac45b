#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harvest/diagnostics.hpp"

namespace harvest::config {

enum class ConfigFormat { Yaml, Json, Xml };

std::string_view to_string(ConfigFormat format);
std::optional<ConfigFormat> parse_config_format(std::string_view text);
/// .yml/.yaml, .json, .xml (case-insensitive).
std::optional<ConfigFormat> format_from_extension(const std::filesystem::path& path);

struct Node {
    enum class Kind { Scalar, Map, Seq };

    Kind kind = Kind::Scalar;
    /// Scalar text as written (quotes removed); numbers and booleans are not coerced.
    std::string scalar;
    /// YAML `~`/empty, JSON null, empty XML element.
    bool is_null = false;
    /// Insertion-ordered; keys are unique.
    std::vector<std::pair<std::string, Node>> map;
    std::vector<Node> seq;
    std::uint32_t line = 1;
    std::uint32_t column = 1;

    static Node make_scalar(std::string text, std::uint32_t line = 1, std::uint32_t column = 1);
    static Node make_null(std::uint32_t line = 1, std::uint32_t column = 1);
    static Node make_map(std::uint32_t line = 1, std::uint32_t column = 1);
    static Node make_seq(std::uint32_t line = 1, std::uint32_t column = 1);

    bool is_scalar() const { return kind == Kind::Scalar; }
    bool is_map() const { return kind == Kind::Map; }
    bool is_seq() const { return kind == Kind::Seq; }

    const Node* find(std::string_view key) const;
    /// Inserts or replaces, keeping the original position on replace.
    Node& set(std::string key, Node value);
};

/// Structural equality, ignoring positions.
bool same_tree(const Node& a, const Node& b);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::uint32_t line, std::uint32_t column);
    std::uint32_t line() const noexcept { return line_; }
    std::uint32_t column() const noexcept { return column_; }

private:
    std::uint32_t line_;
    std::uint32_t column_;
};

/// Throws ParseError. Unsupported-but-tolerated input (extra YAML documents,
/// duplicate keys) is reported through `diags` when given.
Node load_config(std::string_view bytes, ConfigFormat format, Diagnostics* diags = nullptr);

/// Writes a tree back out. XML needs a single-key root map whose keys are
/// element names (or `@attr` / `#text`); throws std::invalid_argument otherwise.
std::string serialize_config(const Node& tree, ConfigFormat format);

/// Descends maps by key and sequences by decimal index.
const Node* lookup_node(const Node& tree, const std::vector<std::string>& key_path);

/// Scalar at the end of `key_path`, or nothing (including for an empty path).
std::optional<std::string> lookup(const Node& tree, const std::vector<std::string>& key_path);

}  // namespace harvest::config
