#include "harvest/config_tree.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "harvest/text.hpp"

namespace harvest::config {

namespace {

constexpr int kMaxDepth = 512;

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// ---------------------------------------------------------------- YAML

std::uint32_t mark_line(const YAML::Mark& m) { return m.is_null() ? 1 : static_cast<std::uint32_t>(m.line + 1); }
std::uint32_t mark_column(const YAML::Mark& m) {
    return m.is_null() ? 1 : static_cast<std::uint32_t>(m.column + 1);
}

Node from_yaml(const YAML::Node& y, Diagnostics* diags, int depth) {
    if (depth > kMaxDepth) throw ParseError("nesting too deep", mark_line(y.Mark()), mark_column(y.Mark()));
    const auto line = mark_line(y.Mark());
    const auto column = mark_column(y.Mark());
    switch (y.Type()) {
        case YAML::NodeType::Undefined:
        case YAML::NodeType::Null:
            return Node::make_null(line, column);
        case YAML::NodeType::Scalar:
            return Node::make_scalar(y.Scalar(), line, column);
        case YAML::NodeType::Sequence: {
            Node n = Node::make_seq(line, column);
            for (const auto& item : y) n.seq.push_back(from_yaml(item, diags, depth + 1));
            return n;
        }
        case YAML::NodeType::Map: {
            Node n = Node::make_map(line, column);
            for (const auto& kv : y) {
                const YAML::Node& key = kv.first;
                if (!key.IsScalar()) {
                    if (diags) diags->info("config-complex-key", "non-scalar mapping key ignored");
                    continue;
                }
                if (n.find(key.Scalar()) && diags) {
                    diags->info("config-duplicate-key", fmt::format("duplicate key '{}' (last wins)", key.Scalar()));
                }
                n.set(key.Scalar(), from_yaml(kv.second, diags, depth + 1));
            }
            return n;
        }
    }
    return Node::make_null(line, column);
}

Node load_yaml(std::string_view bytes, Diagnostics* diags) {
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(std::string(bytes));
    } catch (const YAML::Exception& e) {
        throw ParseError(e.msg, mark_line(e.mark), mark_column(e.mark));
    }
    if (docs.empty()) return Node::make_map();
    if (docs.size() > 1 && diags) {
        diags->info("config-multi-document",
                    fmt::format("{} YAML documents; only the first is used", docs.size()));
    }
    Node root = from_yaml(docs.front(), diags, 0);
    if (root.is_null) return Node::make_map(root.line, root.column);
    return root;
}

// ---------------------------------------------------------------- JSON

class JsonParser {
public:
    JsonParser(std::string_view s, Diagnostics* diags) : s_(s), diags_(diags) {}

    Node parse() {
        skip_ws();
        Node root = value(0);
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters after JSON document");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
            advance();
    }

    bool consume(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            advance();
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!consume(c)) fail(fmt::format("expected '{}'", c));
    }

    bool literal(std::string_view word) {
        if (s_.substr(pos_, word.size()) != word) return false;
        for (std::size_t i = 0; i < word.size(); ++i) advance();
        return true;
    }

    Node value(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const auto line = line_;
        const auto col = col_;
        const char c = s_[pos_];
        if (c == '{') return object(depth, line, col);
        if (c == '[') return array(depth, line, col);
        if (c == '"') return Node::make_scalar(string(), line, col);
        if (literal("true")) return Node::make_scalar("true", line, col);
        if (literal("false")) return Node::make_scalar("false", line, col);
        if (literal("null")) return Node::make_null(line, col);
        if (c == '-' || (c >= '0' && c <= '9')) return Node::make_scalar(number(), line, col);
        fail(fmt::format("unexpected character '{}'", c));
    }

    Node object(int depth, std::uint32_t line, std::uint32_t col) {
        Node n = Node::make_map(line, col);
        expect('{');
        skip_ws();
        if (consume('}')) return n;
        while (true) {
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected object key");
            std::string key = string();
            skip_ws();
            expect(':');
            skip_ws();
            Node v = value(depth + 1);
            if (n.find(key) && diags_) {
                diags_->info("config-duplicate-key", fmt::format("duplicate key '{}' (last wins)", key));
            }
            n.set(std::move(key), std::move(v));
            skip_ws();
            if (consume('}')) return n;
            expect(',');
        }
    }

    Node array(int depth, std::uint32_t line, std::uint32_t col) {
        Node n = Node::make_seq(line, col);
        expect('[');
        skip_ws();
        if (consume(']')) return n;
        while (true) {
            skip_ws();
            n.seq.push_back(value(depth + 1));
            skip_ws();
            if (consume(']')) return n;
            expect(',');
        }
    }

    unsigned hex4() {
        if (pos_ + 4 > s_.size()) fail("truncated \\u escape");
        unsigned v = 0;
        const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + pos_ + 4, v, 16);
        if (ec != std::errc{} || ptr != s_.data() + pos_ + 4) fail("invalid \\u escape");
        for (int i = 0; i < 4; ++i) advance();
        return v;
    }

    std::string string() {
        expect('"');
        std::string out;
        while (true) {
            if (pos_ >= s_.size()) fail("unterminated string");
            const char c = s_[pos_];
            if (c == '"') {
                advance();
                return out;
            }
            if (static_cast<unsigned char>(c) < 0x20) fail("control character in string");
            if (c != '\\') {
                out.push_back(c);
                advance();
                continue;
            }
            advance();
            if (pos_ >= s_.size()) fail("unterminated escape");
            const char e = s_[pos_];
            advance();
            switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case '/': out.push_back('/'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case 'n': out.push_back('\n'); break;
                case 'r': out.push_back('\r'); break;
                case 't': out.push_back('\t'); break;
                case 'u': {
                    char32_t cp = hex4();
                    if (cp >= 0xD800 && cp <= 0xDBFF && s_.substr(pos_, 2) == "\\u") {
                        advance();
                        advance();
                        const char32_t lo = hex4();
                        if (lo >= 0xDC00 && lo <= 0xDFFF) {
                            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                        } else {
                            append_utf8(out, 0xFFFD);
                            cp = lo;
                        }
                    }
                    if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0xFFFD;
                    append_utf8(out, cp);
                    break;
                }
                default:
                    fail(fmt::format("invalid escape '\\{}'", e));
            }
        }
    }

    std::string number() {
        const std::size_t start = pos_;
        consume('-');
        if (!consume('0')) {
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("invalid number");
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
        }
        if (consume('.')) {
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("invalid fraction");
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            advance();
            if (!consume('+')) consume('-');
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("invalid exponent");
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string_view s_;
    Diagnostics* diags_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
};

// ---------------------------------------------------------------- XML

class XmlParser {
public:
    explicit XmlParser(std::string_view s) : s_(s) {}

    Node parse() {
        if (s_.substr(0, 3) == "\xEF\xBB\xBF") skip(3);
        misc();
        if (at_end() || peek() != '<') fail("expected root element");
        const auto line = line_;
        const auto col = col_;
        auto [name, content] = element(0);
        misc();
        if (!at_end()) fail("content after root element");
        Node root = Node::make_map(line, col);
        root.set(std::move(name), std::move(content));
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    bool starts(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip(std::size_t n) {
        for (std::size_t i = 0; i < n && !at_end(); ++i) advance();
    }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }
    void skip_past(std::string_view terminator, const char* what) {
        const auto end = s_.find(terminator, pos_);
        if (end == std::string_view::npos) fail(fmt::format("unterminated {}", what));
        skip(end + terminator.size() - pos_);
    }

    // Prolog, comments, processing instructions and doctype between elements.
    void misc() {
        while (true) {
            skip_ws();
            if (starts("<?")) {
                skip_past("?>", "processing instruction");
            } else if (starts("<!--")) {
                skip_past("-->", "comment");
            } else if (starts("<!DOCTYPE") || starts("<!doctype")) {
                int depth = 0;
                while (!at_end()) {
                    const char c = peek();
                    advance();
                    if (c == '[') ++depth;
                    if (c == ']') --depth;
                    if (c == '>' && depth <= 0) break;
                }
            } else {
                return;
            }
        }
    }

    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':' ||
               static_cast<unsigned char>(c) >= 0x80;
    }

    std::string name() {
        const std::size_t start = pos_;
        while (!at_end() && name_char(peek())) advance();
        if (pos_ == start) fail("expected name");
        return std::string(s_.substr(start, pos_ - start));
    }

    void decode_entity(std::string& out) {
        const auto semi = s_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 12) fail("unterminated entity reference");
        const std::string_view ent = s_.substr(pos_ + 1, semi - pos_ - 1);
        if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "amp") out += '&';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (!ent.empty() && ent[0] == '#') {
            const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
            const std::string_view digits = ent.substr(hex ? 2 : 1);
            unsigned long cp = 0;
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (ec != std::errc{} || ptr != digits.data() + digits.size() || cp > 0x10FFFF)
                fail("invalid character reference");
            append_utf8(out, static_cast<char32_t>(cp));
        } else {
            fail(fmt::format("unknown entity '&{};'", ent));
        }
        skip(semi + 1 - pos_);
    }

    std::string attribute_value() {
        if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        const char quote = peek();
        advance();
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated attribute value");
            const char c = peek();
            if (c == quote) {
                advance();
                return out;
            }
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') {
                decode_entity(out);
                continue;
            }
            out.push_back(c);
            advance();
        }
    }

    // Repeated child elements collect into a sequence; element content is never itself a sequence.
    void add_child(Node& n, std::string key, Node child) {
        for (auto& [k, v] : n.map) {
            if (k != key) continue;
            if (!v.is_seq()) {
                Node list = Node::make_seq(v.line, v.column);
                list.seq.push_back(std::move(v));
                v = std::move(list);
            }
            v.seq.push_back(std::move(child));
            return;
        }
        n.set(std::move(key), std::move(child));
    }

    std::pair<std::string, Node> element(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        const auto line = line_;
        const auto col = col_;
        advance();  // '<'
        std::string tag = name();
        Node n = Node::make_map(line, col);
        bool has_structure = false;
        while (true) {
            skip_ws();
            if (at_end()) fail("unterminated start tag");
            if (starts("/>")) {
                skip(2);
                return {std::move(tag), finish(std::move(n), has_structure, {}, line, col)};
            }
            if (peek() == '>') {
                advance();
                break;
            }
            const auto aline = line_;
            const auto acol = col_;
            std::string attr = name();
            skip_ws();
            if (at_end() || peek() != '=') fail("expected '=' after attribute name");
            advance();
            skip_ws();
            std::string value = attribute_value();
            if (n.find("@" + attr)) fail(fmt::format("duplicate attribute '{}'", attr));
            n.set("@" + attr, Node::make_scalar(std::move(value), aline, acol));
            has_structure = true;
        }

        std::string text;
        while (true) {
            if (at_end()) fail(fmt::format("element <{}> not closed", tag));
            if (starts("</")) {
                skip(2);
                const std::string closing = name();
                if (closing != tag) fail(fmt::format("mismatched closing tag </{}> for <{}>", closing, tag));
                skip_ws();
                if (at_end() || peek() != '>') fail("expected '>'");
                advance();
                break;
            }
            if (starts("<!--")) {
                skip_past("-->", "comment");
            } else if (starts("<![CDATA[")) {
                skip(9);
                const auto end = s_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                text.append(s_.substr(pos_, end - pos_));
                skip(end + 3 - pos_);
            } else if (starts("<?")) {
                skip_past("?>", "processing instruction");
            } else if (peek() == '<') {
                auto [child_name, child] = element(depth + 1);
                add_child(n, std::move(child_name), std::move(child));
                has_structure = true;
            } else if (peek() == '&') {
                decode_entity(text);
            } else {
                text.push_back(peek());
                advance();
            }
        }
        return {std::move(tag), finish(std::move(n), has_structure, text, line, col)};
    }

    Node finish(Node n, bool has_structure, std::string_view raw_text, std::uint32_t line, std::uint32_t col) {
        const std::string text(text::trim(raw_text));
        if (!has_structure) {
            if (text.empty()) return Node::make_null(line, col);
            return Node::make_scalar(text, line, col);
        }
        if (!text.empty()) n.set("#text", Node::make_scalar(text, line, col));
        return n;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
};

// ---------------------------------------------------------------- writers

void emit_yaml(YAML::Emitter& out, const Node& n) {
    if (n.is_map()) {
        out << YAML::BeginMap;
        for (const auto& [k, v] : n.map) {
            out << YAML::Key << YAML::DoubleQuoted << k << YAML::Value;
            emit_yaml(out, v);
        }
        out << YAML::EndMap;
    } else if (n.is_seq()) {
        out << YAML::BeginSeq;
        for (const auto& v : n.seq) emit_yaml(out, v);
        out << YAML::EndSeq;
    } else if (n.is_null) {
        out << YAML::Null;
    } else {
        out << YAML::DoubleQuoted << n.scalar;
    }
}

void json_string(std::string& out, std::string_view s) {
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) out += fmt::format("\\u{:04x}", c);
                else out.push_back(static_cast<char>(c));
        }
    }
    out.push_back('"');
}

void emit_json(std::string& out, const Node& n) {
    if (n.is_map()) {
        out.push_back('{');
        bool first = true;
        for (const auto& [k, v] : n.map) {
            if (!first) out.push_back(',');
            first = false;
            json_string(out, k);
            out.push_back(':');
            emit_json(out, v);
        }
        out.push_back('}');
    } else if (n.is_seq()) {
        out.push_back('[');
        for (std::size_t i = 0; i < n.seq.size(); ++i) {
            if (i) out.push_back(',');
            emit_json(out, n.seq[i]);
        }
        out.push_back(']');
    } else if (n.is_null) {
        out += "null";
    } else {
        json_string(out, n.scalar);
    }
}

bool xml_name(std::string_view s) {
    if (s.empty()) return false;
    const auto first = static_cast<unsigned char>(s.front());
    if (!(std::isalpha(first) || first == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

void emit_xml_element(std::string& out, const std::string& name, const Node& n);

void emit_xml_content(std::string& out, const std::string& name, const Node& n) {
    if (n.is_seq()) {
        for (const auto& item : n.seq) emit_xml_element(out, name, item);
        return;
    }
    emit_xml_element(out, name, n);
}

void emit_xml_element(std::string& out, const std::string& name, const Node& n) {
    if (!xml_name(name)) throw std::invalid_argument(fmt::format("'{}' is not an XML element name", name));
    out += "<" + name;
    if (n.is_seq()) throw std::invalid_argument("nested sequences have no XML form");
    if (n.is_scalar()) {
        if (n.is_null) {
            out += "/>";
            return;
        }
        out += ">" + xml_escape(n.scalar) + "</" + name + ">";
        return;
    }
    std::string body;
    for (const auto& [k, v] : n.map) {
        if (!k.empty() && k.front() == '@') {
            if (!xml_name(k.substr(1)) || !v.is_scalar()) throw std::invalid_argument("bad attribute");
            out += " " + k.substr(1) + "=\"" + xml_escape(v.is_null ? "" : v.scalar) + "\"";
        } else if (k == "#text") {
            if (!v.is_scalar()) throw std::invalid_argument("bad #text");
            body += xml_escape(v.scalar);
        } else {
            emit_xml_content(body, k, v);
        }
    }
    out += ">" + body + "</" + name + ">";
}

}  // namespace

std::string serialize_config(const Node& tree, ConfigFormat format) {
    switch (format) {
        case ConfigFormat::Yaml: {
            YAML::Emitter out;
            emit_yaml(out, tree);
            return std::string(out.c_str()) + "\n";
        }
        case ConfigFormat::Json: {
            std::string out;
            emit_json(out, tree);
            return out + "\n";
        }
        case ConfigFormat::Xml: {
            if (!tree.is_map() || tree.map.size() != 1) throw std::invalid_argument("XML needs exactly one root element");
            std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
            emit_xml_element(out, tree.map.front().first, tree.map.front().second);
            return out + "\n";
        }
    }
    return {};
}

std::string_view to_string(ConfigFormat format) {
    switch (format) {
        case ConfigFormat::Yaml:
            return "yaml";
        case ConfigFormat::Json:
            return "json";
        case ConfigFormat::Xml:
            return "xml";
    }
    return "?";
}

std::optional<ConfigFormat> parse_config_format(std::string_view text) {
    const std::string t = text::to_lower(text);
    if (t == "yaml" || t == "yml") return ConfigFormat::Yaml;
    if (t == "json") return ConfigFormat::Json;
    if (t == "xml") return ConfigFormat::Xml;
    return std::nullopt;
}

std::optional<ConfigFormat> format_from_extension(const std::filesystem::path& path) {
    const std::string ext = text::to_lower(path.extension().string());
    if (ext == ".yml" || ext == ".yaml") return ConfigFormat::Yaml;
    if (ext == ".json") return ConfigFormat::Json;
    if (ext == ".xml") return ConfigFormat::Xml;
    return std::nullopt;
}

Node Node::make_scalar(std::string text, std::uint32_t line, std::uint32_t column) {
    Node n;
    n.scalar = std::move(text);
    n.line = line;
    n.column = column;
    return n;
}

Node Node::make_null(std::uint32_t line, std::uint32_t column) {
    Node n = make_scalar({}, line, column);
    n.is_null = true;
    return n;
}

Node Node::make_map(std::uint32_t line, std::uint32_t column) {
    Node n;
    n.kind = Kind::Map;
    n.line = line;
    n.column = column;
    return n;
}

Node Node::make_seq(std::uint32_t line, std::uint32_t column) {
    Node n;
    n.kind = Kind::Seq;
    n.line = line;
    n.column = column;
    return n;
}

const Node* Node::find(std::string_view key) const {
    for (const auto& [k, v] : map) {
        if (k == key) return &v;
    }
    return nullptr;
}

Node& Node::set(std::string key, Node value) {
    for (auto& [k, v] : map) {
        if (k == key) {
            v = std::move(value);
            return v;
        }
    }
    map.emplace_back(std::move(key), std::move(value));
    return map.back().second;
}

bool same_tree(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Node::Kind::Scalar:
            return a.is_null == b.is_null && a.scalar == b.scalar;
        case Node::Kind::Seq:
            return std::equal(a.seq.begin(), a.seq.end(), b.seq.begin(), b.seq.end(), same_tree);
        case Node::Kind::Map:
            return std::equal(a.map.begin(), a.map.end(), b.map.begin(), b.map.end(),
                              [](const auto& x, const auto& y) { return x.first == y.first && same_tree(x.second, y.second); });
    }
    return false;
}

ParseError::ParseError(const std::string& message, std::uint32_t line, std::uint32_t column)
    : std::runtime_error(fmt::format("{}:{}: {}", line, column, message)), line_(line), column_(column) {}

Node load_config(std::string_view bytes, ConfigFormat format, Diagnostics* diags) {
    switch (format) {
        case ConfigFormat::Yaml:
            return load_yaml(bytes, diags);
        case ConfigFormat::Json:
            return JsonParser(bytes, diags).parse();
        case ConfigFormat::Xml:
            return XmlParser(bytes).parse();
    }
    return Node::make_map();
}

const Node* lookup_node(const Node& tree, const std::vector<std::string>& key_path) {
    const Node* cur = &tree;
    for (const auto& key : key_path) {
        if (cur->is_map()) {
            cur = cur->find(key);
        } else if (cur->is_seq()) {
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
            if (ec != std::errc{} || ptr != key.data() + key.size() || index >= cur->seq.size()) return nullptr;
            cur = &cur->seq[index];
        } else {
            return nullptr;
        }
        if (!cur) return nullptr;
    }
    return cur;
}

std::optional<std::string> lookup(const Node& tree, const std::vector<std::string>& key_path) {
    if (key_path.empty()) return std::nullopt;
    const Node* n = lookup_node(tree, key_path);
    if (!n || !n->is_scalar() || n->is_null) return std::nullopt;
    return n->scalar;
}

}  // namespace harvest::config
