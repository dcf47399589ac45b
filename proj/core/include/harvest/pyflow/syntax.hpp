#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/diagnostics.hpp"

namespace harvest::pyflow {

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, End };

/// One piece of an f-string: literal text, or an interpolated expression
/// with its optional `!conversion` and `:format_spec` kept verbatim.
struct FStringPart {
    bool is_expr = false;
    std::string text;
    std::string conversion;
    std::string format_spec;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
};

struct Token {
    TokenKind kind = TokenKind::End;
    /// Name/Number/Op: source text. String: decoded value (raw body for f-strings).
    std::string text;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    bool is_bytes = false;
    bool is_fstring = false;
    std::vector<FStringPart> fparts;
};

/// Tokenizes Python source. Never throws; problems become diagnostics and the
/// stream always ends with Newline/Dedent*/End.
std::vector<Token> tokenize(std::string_view source, const SourceLocation& ctx, Diagnostics& diags);

enum class ExprKind {
    Name,
    Str,
    JoinedStr,
    FormattedValue,
    Num,
    Constant,  // None / True / False / ...
    Attribute,
    Subscript,
    Call,
    BinOp,
    UnaryOp,
    BoolOp,
    Compare,
    IfExp,
    Dict,
    List,
    Tuple,
    Set,
    Starred,
    NamedExpr,
    Opaque,
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Argument {
    std::optional<std::string> keyword;
    bool star = false;
    bool double_star = false;
    ExprPtr value;
};

struct DictItem {
    /// Null for a `**mapping` entry.
    ExprPtr key;
    ExprPtr value;
};

struct Expr {
    ExprKind kind = ExprKind::Opaque;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    /// Name id, Str value, Num literal, Attribute name, operator, Constant word,
    /// FormattedValue conversion.
    std::string text;
    /// FormattedValue format spec.
    std::string spec;
    bool is_bytes = false;
    /// Attribute/Subscript/Call/Starred/FormattedValue: [0] is the base.
    /// Subscript: [1] is the index. BinOp/BoolOp/Compare: operands.
    /// IfExp: [body, test, orelse]. JoinedStr/List/Tuple/Set: elements.
    /// Opaque: sub-expressions still evaluated for their calls.
    std::vector<ExprPtr> items;
    std::vector<Argument> args;
    std::vector<DictItem> dict_items;
};

enum class StmtKind {
    Import,
    ImportFrom,
    Assign,
    AugAssign,
    AnnAssign,
    ExprStmt,
    Return,
    FunctionDef,
    ClassDef,
    With,
    Compound,
    Delete,
    Global,
    Pass,
    Opaque,
};

struct ImportAlias {
    std::string name;
    std::optional<std::string> asname;
};

struct Param {
    std::string name;
    ExprPtr default_value;
    bool star = false;
    bool double_star = false;
};

struct Stmt;

/// One clause of a compound statement: `if`/`elif`/`else`, loop body,
/// `try`/`except`/`finally`, `case`.
struct Clause {
    std::vector<ExprPtr> header;
    /// Names bound by the clause header (`for x in`, `except E as e`).
    std::vector<ExprPtr> targets;
    std::vector<Stmt> body;
};

struct WithItem {
    ExprPtr context;
    ExprPtr target;
};

struct Stmt {
    StmtKind kind = StmtKind::Opaque;
    std::uint32_t line = 1;
    std::uint32_t column = 1;

    /// Assign: every `=` target; AugAssign/AnnAssign: single target; Delete: deleted.
    std::vector<ExprPtr> targets;
    /// Assign/AugAssign/AnnAssign value, ExprStmt, Return value.
    ExprPtr value;
    /// AugAssign operator without `=`.
    std::string op;

    /// Import / ImportFrom.
    std::string module;
    int level = 0;
    bool star = false;
    std::vector<ImportAlias> names;

    /// FunctionDef / ClassDef.
    std::string name;
    std::vector<Param> params;
    std::vector<ExprPtr> decorators;
    std::vector<Argument> bases;

    std::vector<WithItem> with_items;
    std::vector<Clause> clauses;
    std::vector<Stmt> body;
};

struct Module {
    /// Repository-relative path.
    std::string path;
    /// Dotted module name (`pkg.sub`; `pkg/__init__.py` is `pkg`).
    std::string name;
    bool is_package = false;
    std::vector<Stmt> body;
};

/// Parses a module. Unrecognized statements become Opaque nodes with a
/// `python-opaque` diagnostic; the call never throws on malformed input.
Module parse_module(std::string_view content, const std::string& path, Diagnostics& diags,
                    const std::optional<std::string>& commit_id = std::nullopt);

/// Dotted module name for a repository-relative `.py` path.
std::string module_name_for_path(std::string_view path, bool* is_package = nullptr);

}  // namespace harvest::pyflow
