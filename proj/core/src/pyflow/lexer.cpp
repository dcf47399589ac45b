#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "harvest/pyflow/syntax.hpp"
#include "harvest/text.hpp"

namespace harvest::pyflow {

namespace {

constexpr std::array kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "!=", "%=", "&=", "**", "*=", "+=", "-=", "->", "//", "/=", ":=",
    "<<",  "<=",  "==",  ">=",  ">>", "@=", "^=", "|=", "%",  "&",  "(",  ")",  "*",  "+",  ",",  "-",
    ".",   "/",   ":",   ";",   "<",  "=",  ">",  "@",  "[",  "]",  "^",  "{",  "|",  "}",  "~",
};

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) { return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

std::string decode_escapes(std::string_view s, bool bytes) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 >= s.size()) {
            out.push_back(s[i]);
            continue;
        }
        const char e = s[++i];
        const auto hex_run = [&](std::size_t n) -> std::optional<std::uint32_t> {
            if (i + n >= s.size()) return std::nullopt;
            std::uint32_t v = 0;
            for (std::size_t k = 1; k <= n; ++k) {
                const char h = s[i + k];
                if (!std::isxdigit(static_cast<unsigned char>(h))) return std::nullopt;
                v = v * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h))
                                                            ? h - '0'
                                                            : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
            }
            return v;
        };
        switch (e) {
            case '\n': break;
            case '\\': out.push_back('\\'); break;
            case '\'': out.push_back('\''); break;
            case '"': out.push_back('"'); break;
            case 'a': out.push_back('\a'); break;
            case 'b': out.push_back('\b'); break;
            case 'f': out.push_back('\f'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case 't': out.push_back('\t'); break;
            case 'v': out.push_back('\v'); break;
            case 'x': {
                if (auto v = hex_run(2)) {
                    if (bytes) out.push_back(static_cast<char>(*v));
                    else append_utf8(out, *v);
                    i += 2;
                } else {
                    out += "\\x";
                }
                break;
            }
            case 'u':
            case 'U': {
                const std::size_t n = e == 'u' ? 4 : 8;
                std::optional<std::uint32_t> v;
                if (!bytes) v = hex_run(n);
                if (v) {
                    append_utf8(out, *v);
                    i += n;
                } else {
                    out.push_back('\\');
                    out.push_back(e);
                }
                break;
            }
            default:
                if (e >= '0' && e <= '7') {
                    std::uint32_t v = static_cast<std::uint32_t>(e - '0');
                    std::size_t k = 1;
                    while (k < 3 && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '7') {
                        v = v * 8 + static_cast<std::uint32_t>(s[++i] - '0');
                        ++k;
                    }
                    if (bytes) out.push_back(static_cast<char>(v & 0xFF));
                    else append_utf8(out, v);
                } else {
                    // Unknown escapes (including \N{...}) stay verbatim.
                    out.push_back('\\');
                    out.push_back(e);
                }
        }
    }
    return out;
}

// Splits an f-string body into literal and expression parts.
std::vector<FStringPart> split_fstring(std::string_view body, bool raw, std::uint32_t line, std::uint32_t column,
                                       bool* ok) {
    std::vector<FStringPart> parts;
    std::string literal;
    std::uint32_t lit_line = line;
    std::uint32_t lit_col = column;
    *ok = true;
    const auto pos_of = [&](std::size_t idx) {
        std::uint32_t l = line;
        std::uint32_t c = column;
        for (std::size_t k = 0; k < idx; ++k) {
            if (body[k] == '\n') {
                ++l;
                c = 1;
            } else {
                ++c;
            }
        }
        return std::pair{l, c};
    };
    const auto flush = [&] {
        if (literal.empty()) return;
        FStringPart p;
        p.text = raw ? literal : decode_escapes(literal, false);
        p.line = lit_line;
        p.column = lit_col;
        parts.push_back(std::move(p));
        literal.clear();
    };
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
            literal.push_back('{');
            i += 2;
            continue;
        }
        if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            literal.push_back('}');
            i += 2;
            continue;
        }
        if (c == '}') {
            *ok = false;
            literal.push_back(c);
            ++i;
            continue;
        }
        if (c != '{') {
            if (literal.empty()) std::tie(lit_line, lit_col) = pos_of(i);
            literal.push_back(c);
            ++i;
            continue;
        }
        flush();
        const std::size_t start = i + 1;
        std::size_t j = start;
        int depth = 0;
        char quote = 0;
        for (; j < body.size(); ++j) {
            const char d = body[j];
            if (quote) {
                if (d == quote) quote = 0;
                continue;
            }
            if (d == '\'' || d == '"') {
                quote = d;
            } else if (d == '(' || d == '[' || d == '{') {
                ++depth;
            } else if (d == ')' || d == ']' || d == '}') {
                if (depth == 0) break;
                --depth;
            } else if (depth == 0 && d == '!' && j + 1 < body.size() && body[j + 1] != '=') {
                break;
            } else if (depth == 0 && d == ':') {
                break;
            }
        }
        if (j >= body.size()) {
            *ok = false;
            break;
        }
        FStringPart part;
        part.is_expr = true;
        part.text = std::string(body.substr(start, j - start));
        std::tie(part.line, part.column) = pos_of(start);
        std::string_view trimmed = text::trim(part.text);
        if (!trimmed.empty() && trimmed.back() == '=' && trimmed.size() > 1 &&
            std::string_view("=!<>").find(trimmed[trimmed.size() - 2]) == std::string_view::npos) {
            part.conversion = "=";
        }
        if (body[j] == '!') {
            const std::size_t cs = j + 1;
            while (j < body.size() && body[j] != ':' && body[j] != '}') ++j;
            part.conversion = std::string(body.substr(cs, j - cs));
        }
        if (j < body.size() && body[j] == ':') {
            const std::size_t ss = j + 1;
            int nest = 0;
            for (++j; j < body.size(); ++j) {
                if (body[j] == '{') ++nest;
                else if (body[j] == '}') {
                    if (nest == 0) break;
                    --nest;
                }
            }
            part.format_spec = std::string(body.substr(ss, j - ss));
        }
        if (j >= body.size()) {
            *ok = false;
            break;
        }
        parts.push_back(std::move(part));
        i = j + 1;
    }
    flush();
    return parts;
}

class Lexer {
public:
    Lexer(std::string_view src, const SourceLocation& ctx, Diagnostics& diags) : s_(src), ctx_(ctx), diags_(diags) {}

    std::vector<Token> run() {
        if (s_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
        while (pos_ < s_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (!indentation()) continue;
            }
            at_line_start_ = false;
            const char c = s_[pos_];
            if (c == '\n' || c == '\r') {
                newline_char();
                if (depth_ == 0) {
                    emit_newline();
                    at_line_start_ = true;
                }
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\f') {
                advance();
                continue;
            }
            if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') advance();
                continue;
            }
            if (c == '\\' && pos_ + 1 < s_.size() && (s_[pos_ + 1] == '\n' || s_[pos_ + 1] == '\r')) {
                advance();
                newline_char();
                continue;
            }
            if (is_name_start(c)) {
                name_or_string();
                continue;
            }
            if (c == '\'' || c == '"') {
                string_literal(pos_, line_, col_, "");
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
                number();
                continue;
            }
            op();
        }
        emit_newline();
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(TokenKind::Dedent, "");
        }
        push(TokenKind::End, "");
        return std::move(tokens_);
    }

private:
    void advance() {
        ++pos_;
        ++col_;
    }

    void newline_char() {
        if (s_[pos_] == '\r' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
        ++line_;
        col_ = 1;
    }

    void push(TokenKind kind, std::string text, std::uint32_t line = 0, std::uint32_t col = 0) {
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        t.line = line ? line : line_;
        t.column = col ? col : col_;
        tokens_.push_back(std::move(t));
    }

    void emit_newline() {
        if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline && tokens_.back().kind != TokenKind::Indent &&
            tokens_.back().kind != TokenKind::Dedent) {
            push(TokenKind::Newline, "");
        }
    }

    void warn(const std::string& msg, std::uint32_t line) {
        SourceLocation loc = ctx_;
        loc.line = line;
        loc.column.reset();
        diags_.warn("python-lex", msg, loc);
    }

    // Returns false when the physical line was blank or comment-only (consumed).
    bool indentation() {
        std::size_t width = 0;
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\f')) {
            width = s_[pos_] == '\t' ? (width / 8 + 1) * 8 : width + 1;
            advance();
        }
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        if (c == '#' || c == '\n' || c == '\r') {
            while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') advance();
            if (pos_ < s_.size()) newline_char();
            return false;
        }
        if (c == '\\' && pos_ + 1 < s_.size() && (s_[pos_ + 1] == '\n' || s_[pos_ + 1] == '\r')) {
            return true;
        }
        if (width > indents_.back()) {
            indents_.push_back(width);
            push(TokenKind::Indent, "");
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                push(TokenKind::Dedent, "");
            }
            if (width != indents_.back()) {
                warn("inconsistent dedent", line_);
                indents_.push_back(width);
                push(TokenKind::Indent, "");
            }
        }
        at_line_start_ = false;
        return true;
    }

    void name_or_string() {
        const std::size_t start = pos_;
        const auto line = line_;
        const auto col = col_;
        while (pos_ < s_.size() && is_name_char(s_[pos_])) advance();
        const std::string word(s_.substr(start, pos_ - start));
        if (pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"') && word.size() <= 2) {
            const std::string prefix = text::to_lower(word);
            static constexpr std::array kPrefixes = {"r", "u", "b", "f", "br", "rb", "fr", "rf"};
            if (std::find(kPrefixes.begin(), kPrefixes.end(), prefix) != kPrefixes.end()) {
                string_literal(pos_, line, col, prefix);
                return;
            }
        }
        push(TokenKind::Name, word, line, col);
    }

    void string_literal(std::size_t quote_pos, std::uint32_t line, std::uint32_t col, const std::string& prefix) {
        const char q = s_[quote_pos];
        const bool triple = s_.substr(quote_pos, 3) == std::string(3, q);
        const bool raw = prefix.find('r') != std::string::npos;
        const bool bytes = prefix.find('b') != std::string::npos;
        const bool fstring = prefix.find('f') != std::string::npos;
        const std::size_t qlen = triple ? 3 : 1;
        for (std::size_t k = 0; k < qlen; ++k) advance();
        const std::size_t body_start = pos_;
        const auto body_line = line_;
        const auto body_col = col_;
        bool closed = false;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '\\' && pos_ + 1 < s_.size()) {
                advance();
                if (s_[pos_] == '\n' || s_[pos_] == '\r') newline_char();
                else advance();
                continue;
            }
            if (c == q && (!triple || s_.substr(pos_, 3) == std::string(3, q))) {
                closed = true;
                break;
            }
            if (c == '\n' || c == '\r') {
                if (!triple) break;
                newline_char();
                continue;
            }
            advance();
        }
        const std::string_view body = s_.substr(body_start, pos_ - body_start);
        if (closed) {
            for (std::size_t k = 0; k < qlen; ++k) advance();
        } else {
            warn("unterminated string literal", line);
        }
        Token t;
        t.kind = TokenKind::String;
        t.line = line;
        t.column = col;
        t.is_bytes = bytes;
        t.is_fstring = fstring;
        if (fstring) {
            bool ok = true;
            t.fparts = split_fstring(body, raw, body_line, body_col, &ok);
            t.text = std::string(body);
            if (!ok) warn("malformed f-string", line);
        } else {
            t.text = raw ? std::string(body) : decode_escapes(body, bytes);
        }
        tokens_.push_back(std::move(t));
    }

    void number() {
        const std::size_t start = pos_;
        const auto line = line_;
        const auto col = col_;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
                advance();
            } else if ((c == '+' || c == '-') && pos_ > start &&
                       (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E') &&
                       !(s_.substr(start, 2) == "0x" || s_.substr(start, 2) == "0X")) {
                advance();
            } else {
                break;
            }
        }
        push(TokenKind::Number, std::string(s_.substr(start, pos_ - start)), line, col);
    }

    void op() {
        for (const std::string_view o : kOperators) {
            if (s_.substr(pos_, o.size()) == o) {
                const auto line = line_;
                const auto col = col_;
                for (std::size_t k = 0; k < o.size(); ++k) advance();
                if (o == "(" || o == "[" || o == "{") ++depth_;
                if ((o == ")" || o == "]" || o == "}") && depth_ > 0) --depth_;
                push(TokenKind::Op, std::string(o), line, col);
                return;
            }
        }
        // Stray character ('$', '?', '!', backtick): keep it as an operator token.
        push(TokenKind::Op, std::string(1, s_[pos_]));
        advance();
    }

    std::string_view s_;
    const SourceLocation& ctx_;
    Diagnostics& diags_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<std::size_t> indents_{0};
    std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source, const SourceLocation& ctx, Diagnostics& diags) {
    return Lexer(source, ctx, diags).run();
}

}  // namespace harvest::pyflow
