#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include "harvest/pyflow/syntax.hpp"
#include "harvest/text.hpp"

namespace harvest::pyflow {

namespace {

struct Fail {
    std::string message;
    std::uint32_t line;
};

const std::set<std::string, std::less<>> kKeywords = {
    "False", "None",   "True",    "and",      "as",   "assert", "async",  "await", "break",
    "class", "continue", "def",   "del",      "elif", "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",   "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",  "while",  "with",   "yield",
};

constexpr std::array kAugOps = {"+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "^=", "|=", "@="};

ExprPtr make_expr(ExprKind kind, const Token& at) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = at.line;
    e->column = at.column;
    return e;
}

ExprPtr make_expr(ExprKind kind, std::uint32_t line, std::uint32_t column) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = line;
    e->column = column;
    return e;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, const SourceLocation& ctx, Diagnostics& diags)
        : toks_(std::move(tokens)), ctx_(ctx), diags_(diags) {}

    std::vector<Stmt> module() {
        std::vector<Stmt> body;
        while (!at(TokenKind::End)) {
            if (at(TokenKind::Newline) || at(TokenKind::Dedent)) {
                ++pos_;
                continue;
            }
            if (at(TokenKind::Indent)) {
                body.push_back(stray_block());
                continue;
            }
            statement(body);
        }
        return body;
    }

    /// Parses a standalone expression (f-string interpolation).
    ExprPtr standalone_expression() {
        while (at(TokenKind::Newline) || at(TokenKind::Indent)) ++pos_;
        ExprPtr e = testlist_star();
        while (at(TokenKind::Newline) || at(TokenKind::Dedent)) ++pos_;
        if (!at(TokenKind::End)) fail("unexpected tokens in interpolation");
        return e;
    }

private:
    // ------------------------------------------------------------ token helpers

    const Token& cur() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
    const Token& peek(std::size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(TokenKind k) const { return cur().kind == k; }
    bool at_op(std::string_view op) const { return cur().kind == TokenKind::Op && cur().text == op; }
    bool at_kw(std::string_view kw) const { return cur().kind == TokenKind::Name && cur().text == kw; }
    bool peek_op(std::size_t k, std::string_view op) const {
        return peek(k).kind == TokenKind::Op && peek(k).text == op;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw Fail{msg, cur().line}; }

    bool accept_op(std::string_view op) {
        if (!at_op(op)) return false;
        ++pos_;
        return true;
    }
    bool accept_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        ++pos_;
        return true;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail(fmt::format("expected '{}'", op));
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail(fmt::format("expected '{}'", kw));
    }
    std::string expect_name() {
        if (!at(TokenKind::Name) || kKeywords.count(cur().text)) fail("expected identifier");
        return toks_[pos_++].text;
    }
    void expect_newline() {
        if (at(TokenKind::Newline)) {
            ++pos_;
            return;
        }
        if (at(TokenKind::End) || at(TokenKind::Dedent)) return;
        fail("expected end of statement");
    }

    SourceLocation loc(std::uint32_t line) const {
        SourceLocation l = ctx_;
        l.line = line;
        l.column.reset();
        return l;
    }

    // ------------------------------------------------------------ statements

    Stmt stray_block() {
        diags_.info("python-opaque", "unexpected indent; block parsed as opaque", loc(cur().line));
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        Clause c;
        c.body = indented_block();
        s.clauses.push_back(std::move(c));
        return s;
    }

    // Expects INDENT ... DEDENT.
    std::vector<Stmt> indented_block() {
        std::vector<Stmt> body;
        if (!at(TokenKind::Indent)) fail("expected an indented block");
        ++pos_;
        while (!at(TokenKind::Dedent) && !at(TokenKind::End)) {
            if (at(TokenKind::Newline)) {
                ++pos_;
                continue;
            }
            if (at(TokenKind::Indent)) {
                body.push_back(stray_block());
                continue;
            }
            statement(body);
        }
        if (at(TokenKind::Dedent)) ++pos_;
        return body;
    }

    std::vector<Stmt> suite() {
        expect_op(":");
        if (at(TokenKind::Newline)) {
            ++pos_;
            return indented_block();
        }
        std::vector<Stmt> body;
        simple_statements(body);
        return body;
    }

    void statement(std::vector<Stmt>& out) {
        const std::size_t start = pos_;
        const std::size_t out_size = out.size();
        try {
            if (!compound_statement(out)) simple_statements(out);
        } catch (const Fail& f) {
            out.resize(out_size);
            pos_ = start;
            recover(out, f);
        }
    }

    void recover(std::vector<Stmt>& out, const Fail& f) {
        const Token first = cur();
        diags_.info("python-opaque", fmt::format("unparsed statement ({})", f.message), loc(first.line));
        while (!at(TokenKind::Newline) && !at(TokenKind::End)) {
            if (at(TokenKind::Indent) || at(TokenKind::Dedent)) break;
            ++pos_;
        }
        if (at(TokenKind::Newline)) ++pos_;
        Stmt s;
        s.kind = StmtKind::Opaque;
        s.line = first.line;
        s.column = first.column;
        if (at(TokenKind::Indent)) {
            s.kind = StmtKind::Compound;
            Clause c;
            try {
                c.body = indented_block();
            } catch (const Fail&) {
            }
            s.clauses.push_back(std::move(c));
        }
        out.push_back(std::move(s));
        if (pos_ == 0 || (&toks_[pos_ - 1] == &first && !at(TokenKind::End))) ++pos_;
    }

    bool line_ends_with_colon() const {
        int depth = 0;
        for (std::size_t i = pos_; i < toks_.size(); ++i) {
            const Token& t = toks_[i];
            if (t.kind == TokenKind::Newline || t.kind == TokenKind::End) {
                return i > pos_ && toks_[i - 1].kind == TokenKind::Op && toks_[i - 1].text == ":";
            }
            if (t.kind == TokenKind::Op && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
            if (t.kind == TokenKind::Op && (t.text == ")" || t.text == "]" || t.text == "}")) --depth;
        }
        return false;
    }

    bool compound_statement(std::vector<Stmt>& out) {
        if (at_op("@")) {
            std::vector<ExprPtr> decorators;
            while (accept_op("@")) {
                decorators.push_back(named_test());
                expect_newline();
            }
            const bool async = accept_kw("async");
            (void)async;
            Stmt s;
            if (at_kw("def")) s = function_def();
            else if (at_kw("class")) s = class_def();
            else fail("decorator without def or class");
            s.decorators = std::move(decorators);
            out.push_back(std::move(s));
            return true;
        }
        if (at_kw("async") && (peek().text == "def" || peek().text == "with" || peek().text == "for")) ++pos_;
        if (at_kw("def")) {
            out.push_back(function_def());
            return true;
        }
        if (at_kw("class")) {
            out.push_back(class_def());
            return true;
        }
        if (at_kw("if")) {
            out.push_back(if_stmt());
            return true;
        }
        if (at_kw("while")) {
            out.push_back(while_stmt());
            return true;
        }
        if (at_kw("for")) {
            out.push_back(for_stmt());
            return true;
        }
        if (at_kw("try")) {
            out.push_back(try_stmt());
            return true;
        }
        if (at_kw("with")) {
            out.push_back(with_stmt());
            return true;
        }
        if ((at_kw("match") || at_kw("case")) && peek().kind != TokenKind::Op && line_ends_with_colon()) {
            out.push_back(soft_compound());
            return true;
        }
        if ((at_kw("match") || at_kw("case")) && (peek_op(1, "(") || peek_op(1, "[") || peek_op(1, "{") ||
                                                  peek_op(1, "-")) &&
            line_ends_with_colon() && !peek_op(1, "=")) {
            out.push_back(soft_compound());
            return true;
        }
        return false;
    }

    Stmt soft_compound() {
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        s.column = cur().column;
        Clause c;
        const bool is_match = at_kw("match");
        ++pos_;
        if (is_match) {
            const std::size_t save = pos_;
            try {
                c.header.push_back(testlist_star());
            } catch (const Fail&) {
                pos_ = save;
            }
        }
        // Patterns are skipped; a `case` header binds nothing we track.
        int depth = 0;
        while (!at(TokenKind::End) && !at(TokenKind::Newline)) {
            if (depth == 0 && at_op(":") && (peek().kind == TokenKind::Newline)) break;
            if (at_op("(") || at_op("[") || at_op("{")) ++depth;
            if (at_op(")") || at_op("]") || at_op("}")) --depth;
            ++pos_;
        }
        c.body = suite();
        s.clauses.push_back(std::move(c));
        return s;
    }

    Stmt function_def() {
        Stmt s;
        s.kind = StmtKind::FunctionDef;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("def");
        s.name = expect_name();
        if (at_op("[")) skip_brackets();  // type parameters
        expect_op("(");
        s.params = parameters(")");
        expect_op(")");
        if (accept_op("->")) (void)test();
        s.body = suite();
        return s;
    }

    void skip_brackets() {
        int depth = 0;
        do {
            if (at_op("(") || at_op("[") || at_op("{")) ++depth;
            if (at_op(")") || at_op("]") || at_op("}")) --depth;
            if (at(TokenKind::End)) fail("unbalanced brackets");
            ++pos_;
        } while (depth > 0);
    }

    std::vector<Param> parameters(std::string_view close) {
        std::vector<Param> params;
        while (!at_op(close)) {
            Param p;
            if (accept_op("/")) {
                if (!accept_op(",")) break;
                continue;
            }
            if (accept_op("**")) p.double_star = true;
            else if (accept_op("*")) p.star = true;
            if (p.star && (at_op(",") || at_op(close))) {
                if (!accept_op(",")) break;
                continue;
            }
            p.name = expect_name();
            if (close == ")" && accept_op(":")) (void)test();
            if (accept_op("=")) p.default_value = test();
            params.push_back(std::move(p));
            if (!accept_op(",")) break;
        }
        return params;
    }

    Stmt class_def() {
        Stmt s;
        s.kind = StmtKind::ClassDef;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("class");
        s.name = expect_name();
        if (at_op("[")) skip_brackets();
        if (accept_op("(")) {
            s.bases = arguments();
            expect_op(")");
        }
        s.body = suite();
        return s;
    }

    Stmt if_stmt() {
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("if");
        Clause c;
        c.header.push_back(named_test());
        c.body = suite();
        s.clauses.push_back(std::move(c));
        while (at_kw("elif")) {
            ++pos_;
            Clause e;
            e.header.push_back(named_test());
            e.body = suite();
            s.clauses.push_back(std::move(e));
        }
        if (accept_kw("else")) {
            Clause e;
            e.body = suite();
            s.clauses.push_back(std::move(e));
        }
        return s;
    }

    Stmt while_stmt() {
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("while");
        Clause c;
        c.header.push_back(named_test());
        c.body = suite();
        s.clauses.push_back(std::move(c));
        if (accept_kw("else")) {
            Clause e;
            e.body = suite();
            s.clauses.push_back(std::move(e));
        }
        return s;
    }

    Stmt for_stmt() {
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("for");
        Clause c;
        c.targets.push_back(target_list());
        expect_kw("in");
        c.header.push_back(testlist_star());
        c.body = suite();
        s.clauses.push_back(std::move(c));
        if (accept_kw("else")) {
            Clause e;
            e.body = suite();
            s.clauses.push_back(std::move(e));
        }
        return s;
    }

    Stmt try_stmt() {
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("try");
        Clause body;
        body.body = suite();
        s.clauses.push_back(std::move(body));
        while (at_kw("except")) {
            ++pos_;
            accept_op("*");
            Clause h;
            if (!at_op(":")) {
                h.header.push_back(test());
                if (accept_op(",")) h.header.push_back(test());
                if (accept_kw("as")) {
                    const Token& t = cur();
                    auto name = make_expr(ExprKind::Name, t);
                    name->text = expect_name();
                    h.targets.push_back(std::move(name));
                }
            }
            h.body = suite();
            s.clauses.push_back(std::move(h));
        }
        for (const char* kw : {"else", "finally"}) {
            if (accept_kw(kw)) {
                Clause e;
                e.body = suite();
                s.clauses.push_back(std::move(e));
            }
        }
        return s;
    }

    WithItem with_item() {
        WithItem item;
        item.context = test();
        if (accept_kw("as")) item.target = target();
        return item;
    }

    Stmt with_stmt() {
        Stmt s;
        s.kind = StmtKind::With;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("with");
        bool parsed = false;
        if (at_op("(")) {
            const std::size_t save = pos_;
            try {
                ++pos_;
                while (!at_op(")")) {
                    s.with_items.push_back(with_item());
                    if (!accept_op(",")) break;
                }
                expect_op(")");
                if (!at_op(":")) throw Fail{"not a parenthesized with", cur().line};
                parsed = true;
            } catch (const Fail&) {
                pos_ = save;
                s.with_items.clear();
            }
        }
        if (!parsed) {
            do {
                s.with_items.push_back(with_item());
            } while (accept_op(","));
        }
        s.body = suite();
        return s;
    }

    void simple_statements(std::vector<Stmt>& out) {
        while (true) {
            out.push_back(small_statement());
            if (!accept_op(";")) break;
            if (at(TokenKind::Newline) || at(TokenKind::End)) break;
        }
        expect_newline();
    }

    Stmt small_statement() {
        Stmt s;
        s.line = cur().line;
        s.column = cur().column;
        if (accept_kw("pass") || accept_kw("break") || accept_kw("continue")) {
            s.kind = StmtKind::Pass;
            return s;
        }
        if (accept_kw("return")) {
            s.kind = StmtKind::Return;
            if (!at_statement_end()) s.value = testlist_star();
            return s;
        }
        if (accept_kw("raise")) {
            s.kind = StmtKind::ExprStmt;
            if (!at_statement_end()) {
                auto e = make_expr(ExprKind::Opaque, s.line, s.column);
                e->items.push_back(test());
                if (accept_kw("from")) e->items.push_back(test());
                s.value = std::move(e);
            }
            return s;
        }
        if (accept_kw("global") || accept_kw("nonlocal")) {
            s.kind = StmtKind::Global;
            do {
                s.names.push_back(ImportAlias{expect_name(), std::nullopt});
            } while (accept_op(","));
            return s;
        }
        if (accept_kw("del")) {
            s.kind = StmtKind::Delete;
            do {
                s.targets.push_back(expr());
            } while (accept_op(",") && !at_statement_end());
            return s;
        }
        if (accept_kw("assert")) {
            s.kind = StmtKind::ExprStmt;
            auto e = make_expr(ExprKind::Opaque, s.line, s.column);
            e->items.push_back(test());
            if (accept_op(",")) e->items.push_back(test());
            s.value = std::move(e);
            return s;
        }
        if (at_kw("import")) return import_stmt();
        if (at_kw("from")) return from_import();
        if (at_kw("type") && peek().kind == TokenKind::Name && !kKeywords.count(peek().text) &&
            (peek_op(2, "=") || peek_op(2, "["))) {
            while (!at_statement_end()) ++pos_;
            s.kind = StmtKind::Pass;
            return s;
        }
        return expression_statement();
    }

    bool at_statement_end() const {
        return at(TokenKind::Newline) || at(TokenKind::End) || at_op(";") || at(TokenKind::Dedent);
    }

    std::string dotted_name() {
        std::string name = expect_name();
        while (accept_op(".")) name += "." + expect_name();
        return name;
    }

    Stmt import_stmt() {
        Stmt s;
        s.kind = StmtKind::Import;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("import");
        do {
            ImportAlias a;
            a.name = dotted_name();
            if (accept_kw("as")) a.asname = expect_name();
            s.names.push_back(std::move(a));
        } while (accept_op(","));
        return s;
    }

    Stmt from_import() {
        Stmt s;
        s.kind = StmtKind::ImportFrom;
        s.line = cur().line;
        s.column = cur().column;
        expect_kw("from");
        while (at_op(".") || at_op("...")) {
            s.level += at_op(".") ? 1 : 3;
            ++pos_;
        }
        if (!at_kw("import")) s.module = dotted_name();
        expect_kw("import");
        if (accept_op("*")) {
            s.star = true;
            return s;
        }
        const bool paren = accept_op("(");
        do {
            if (paren && at_op(")")) break;
            ImportAlias a;
            a.name = expect_name();
            if (accept_kw("as")) a.asname = expect_name();
            s.names.push_back(std::move(a));
        } while (accept_op(","));
        if (paren) expect_op(")");
        return s;
    }

    Stmt expression_statement() {
        Stmt s;
        s.line = cur().line;
        s.column = cur().column;
        ExprPtr first = at_kw("yield") ? yield_expr() : testlist_star();
        if (at_op("=")) {
            s.kind = StmtKind::Assign;
            s.targets.push_back(std::move(first));
            ExprPtr value;
            while (accept_op("=")) {
                value = at_kw("yield") ? yield_expr() : testlist_star();
                if (at_op("=")) s.targets.push_back(std::move(value));
            }
            s.value = std::move(value);
            return s;
        }
        for (const std::string_view op : kAugOps) {
            if (at_op(op)) {
                ++pos_;
                s.kind = StmtKind::AugAssign;
                s.op = std::string(op.substr(0, op.size() - 1));
                s.targets.push_back(std::move(first));
                s.value = at_kw("yield") ? yield_expr() : testlist_star();
                return s;
            }
        }
        if (accept_op(":")) {
            s.kind = StmtKind::AnnAssign;
            s.targets.push_back(std::move(first));
            (void)test();
            if (accept_op("=")) s.value = at_kw("yield") ? yield_expr() : testlist_star();
            return s;
        }
        s.kind = StmtKind::ExprStmt;
        s.value = std::move(first);
        return s;
    }

    // ------------------------------------------------------------ expressions

    ExprPtr yield_expr() {
        auto e = make_expr(ExprKind::Opaque, cur());
        expect_kw("yield");
        accept_kw("from");
        if (!at_statement_end() && !at_op(")") && !at_op("=")) e->items.push_back(testlist_star());
        return e;
    }

    ExprPtr target() {
        if (at_op("*")) {
            auto e = make_expr(ExprKind::Starred, cur());
            ++pos_;
            e->items.push_back(expr());
            return e;
        }
        return expr();
    }

    ExprPtr target_list() {
        const Token& start = cur();
        ExprPtr first = target();
        if (!at_op(",")) return first;
        auto tuple = make_expr(ExprKind::Tuple, start);
        tuple->items.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_kw("in") || at_op("=")) break;
            tuple->items.push_back(target());
        }
        return tuple;
    }

    ExprPtr star_or_named() {
        if (at_op("*")) {
            auto e = make_expr(ExprKind::Starred, cur());
            ++pos_;
            e->items.push_back(expr());
            return e;
        }
        return named_test();
    }

    bool at_testlist_end() const {
        return at_statement_end() || at_op("=") || at_op(")") || at_op("]") || at_op("}") || at_op(":") ||
               at_kw("in") || at_kw("for") || at_kw("async");
    }

    ExprPtr testlist_star() {
        const Token& start = cur();
        ExprPtr first = star_or_named();
        if (!at_op(",")) return first;
        auto tuple = make_expr(ExprKind::Tuple, start);
        tuple->items.push_back(std::move(first));
        for (const auto& op : kAugOps) {
            if (at_op(op)) return tuple;
        }
        while (accept_op(",")) {
            if (at_testlist_end()) break;
            bool aug = false;
            for (const auto& op : kAugOps) aug = aug || at_op(op);
            if (aug) break;
            tuple->items.push_back(star_or_named());
        }
        return tuple;
    }

    ExprPtr named_test() {
        if (at(TokenKind::Name) && peek_op(1, ":=")) {
            auto e = make_expr(ExprKind::NamedExpr, cur());
            auto target = make_expr(ExprKind::Name, cur());
            target->text = expect_name();
            ++pos_;
            e->items.push_back(std::move(target));
            e->items.push_back(test());
            return e;
        }
        return test();
    }

    ExprPtr test() {
        if (at_kw("lambda")) return lambda();
        const Token& start = cur();
        ExprPtr body = or_test();
        if (!at_kw("if")) return body;
        const std::size_t save = pos_;
        ++pos_;
        ExprPtr cond = or_test();
        if (!accept_kw("else")) {
            pos_ = save;
            return body;
        }
        auto e = make_expr(ExprKind::IfExp, start);
        e->items.push_back(std::move(body));
        e->items.push_back(std::move(cond));
        e->items.push_back(test());
        return e;
    }

    ExprPtr test_no_cond() {
        if (at_kw("lambda")) return lambda();
        return or_test();
    }

    ExprPtr lambda() {
        auto e = make_expr(ExprKind::Opaque, cur());
        e->text = "lambda";
        expect_kw("lambda");
        (void)parameters(":");
        expect_op(":");
        (void)test();
        return e;
    }

    ExprPtr or_test() {
        const Token& start = cur();
        ExprPtr left = and_test();
        if (!at_kw("or")) return left;
        auto e = make_expr(ExprKind::BoolOp, start);
        e->text = "or";
        e->items.push_back(std::move(left));
        while (accept_kw("or")) e->items.push_back(and_test());
        return e;
    }

    ExprPtr and_test() {
        const Token& start = cur();
        ExprPtr left = not_test();
        if (!at_kw("and")) return left;
        auto e = make_expr(ExprKind::BoolOp, start);
        e->text = "and";
        e->items.push_back(std::move(left));
        while (accept_kw("and")) e->items.push_back(not_test());
        return e;
    }

    ExprPtr not_test() {
        if (at_kw("not")) {
            auto e = make_expr(ExprKind::UnaryOp, cur());
            e->text = "not";
            ++pos_;
            e->items.push_back(not_test());
            return e;
        }
        return comparison();
    }

    bool at_comp_op() const {
        static constexpr std::array ops = {"<", ">", "==", ">=", "<=", "!="};
        for (const auto* o : ops) {
            if (at_op(o)) return true;
        }
        return at_kw("in") || at_kw("is") || (at_kw("not") && peek().text == "in");
    }

    ExprPtr comparison() {
        const Token& start = cur();
        ExprPtr left = expr();
        if (!at_comp_op()) return left;
        auto e = make_expr(ExprKind::Compare, start);
        e->items.push_back(std::move(left));
        while (at_comp_op()) {
            if (accept_kw("not")) expect_kw("in");
            else if (accept_kw("is")) accept_kw("not");
            else ++pos_;
            e->items.push_back(expr());
        }
        return e;
    }

    template <typename Next>
    ExprPtr binary(std::initializer_list<std::string_view> ops, Next next) {
        const Token& start = cur();
        ExprPtr left = (this->*next)();
        while (true) {
            std::string_view matched;
            for (const auto op : ops) {
                if (at_op(op)) matched = op;
            }
            if (matched.empty()) return left;
            ++pos_;
            auto e = make_expr(ExprKind::BinOp, start);
            e->text = std::string(matched);
            e->items.push_back(std::move(left));
            e->items.push_back((this->*next)());
            left = std::move(e);
        }
    }

    ExprPtr expr() { return binary({"|"}, &Parser::xor_expr); }
    ExprPtr xor_expr() { return binary({"^"}, &Parser::and_expr); }
    ExprPtr and_expr() { return binary({"&"}, &Parser::shift_expr); }
    ExprPtr shift_expr() { return binary({"<<", ">>"}, &Parser::arith_expr); }
    ExprPtr arith_expr() { return binary({"+", "-"}, &Parser::term); }
    ExprPtr term() { return binary({"*", "/", "%", "//", "@"}, &Parser::factor); }

    ExprPtr factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            auto e = make_expr(ExprKind::UnaryOp, cur());
            e->text = cur().text;
            ++pos_;
            e->items.push_back(factor());
            return e;
        }
        return power();
    }

    ExprPtr power() {
        const Token& start = cur();
        accept_kw("await");
        ExprPtr base = primary();
        if (!accept_op("**")) return base;
        auto e = make_expr(ExprKind::BinOp, start);
        e->text = "**";
        e->items.push_back(std::move(base));
        e->items.push_back(factor());
        return e;
    }

    ExprPtr primary() {
        ExprPtr e = atom();
        while (true) {
            if (at_op("(")) {
                auto call = make_expr(ExprKind::Call, e->line, e->column);
                ++pos_;
                call->args = arguments();
                expect_op(")");
                call->items.push_back(std::move(e));
                e = std::move(call);
            } else if (at_op("[")) {
                auto sub = make_expr(ExprKind::Subscript, e->line, e->column);
                ++pos_;
                ExprPtr index = subscript_list();
                expect_op("]");
                sub->items.push_back(std::move(e));
                sub->items.push_back(std::move(index));
                e = std::move(sub);
            } else if (at_op(".") && peek().kind == TokenKind::Name) {
                ++pos_;
                auto attr = make_expr(ExprKind::Attribute, e->line, e->column);
                attr->text = toks_[pos_++].text;
                attr->items.push_back(std::move(e));
                e = std::move(attr);
            } else {
                return e;
            }
        }
    }

    ExprPtr subscript() {
        const Token& start = cur();
        ExprPtr lower;
        if (!at_op(":")) {
            lower = named_test();
            if (!at_op(":")) return lower;
        }
        auto slice = make_expr(ExprKind::Opaque, start);
        slice->text = "slice";
        if (lower) slice->items.push_back(std::move(lower));
        while (accept_op(":")) {
            if (!at_op(":") && !at_op("]") && !at_op(",")) slice->items.push_back(test());
        }
        return slice;
    }

    ExprPtr subscript_list() {
        const Token& start = cur();
        ExprPtr first = at_op("*") ? star_or_named() : subscript();
        if (!at_op(",")) return first;
        auto tuple = make_expr(ExprKind::Tuple, start);
        tuple->items.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) break;
            tuple->items.push_back(at_op("*") ? star_or_named() : subscript());
        }
        return tuple;
    }

    std::vector<Argument> arguments() {
        std::vector<Argument> args;
        while (!at_op(")")) {
            Argument a;
            if (accept_op("**")) {
                a.double_star = true;
                a.value = test();
            } else if (accept_op("*")) {
                a.star = true;
                a.value = test();
            } else if (at(TokenKind::Name) && peek_op(1, "=") && !kKeywords.count(cur().text)) {
                a.keyword = toks_[pos_].text;
                pos_ += 2;
                a.value = test();
            } else {
                a.value = named_test();
                if (at_kw("for") || at_kw("async")) a.value = comprehension(std::move(a.value));
            }
            args.push_back(std::move(a));
            if (!accept_op(",")) break;
        }
        return args;
    }

    ExprPtr comprehension(ExprPtr element) {
        auto e = make_expr(ExprKind::Opaque, element->line, element->column);
        e->text = "comprehension";
        e->items.push_back(std::move(element));
        while (at_kw("for") || at_kw("async") || at_kw("if")) {
            if (accept_kw("if")) {
                e->items.push_back(test_no_cond());
                continue;
            }
            accept_kw("async");
            expect_kw("for");
            (void)target_list();
            expect_kw("in");
            e->items.push_back(or_test());
        }
        return e;
    }

    ExprPtr atom() {
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Name: {
                if (t.text == "None" || t.text == "True" || t.text == "False") {
                    auto e = make_expr(ExprKind::Constant, t);
                    e->text = t.text;
                    ++pos_;
                    return e;
                }
                if (kKeywords.count(t.text)) fail(fmt::format("unexpected keyword '{}'", t.text));
                auto e = make_expr(ExprKind::Name, t);
                e->text = t.text;
                ++pos_;
                return e;
            }
            case TokenKind::Number: {
                auto e = make_expr(ExprKind::Num, t);
                e->text = t.text;
                ++pos_;
                return e;
            }
            case TokenKind::String:
                return strings();
            case TokenKind::Op:
                break;
            default:
                fail("unexpected end of line in expression");
        }
        if (accept_op("...")) {
            auto e = make_expr(ExprKind::Constant, t);
            e->text = "...";
            return e;
        }
        if (at_op("(")) return paren();
        if (at_op("[")) return list_display();
        if (at_op("{")) return brace_display();
        fail(fmt::format("unexpected '{}'", t.text));
    }

    ExprPtr paren() {
        const Token& open = cur();
        ++pos_;
        if (accept_op(")")) return make_expr(ExprKind::Tuple, open);
        if (at_kw("yield")) {
            ExprPtr y = yield_expr();
            expect_op(")");
            return y;
        }
        ExprPtr first = star_or_named();
        if (at_kw("for") || at_kw("async")) {
            ExprPtr comp = comprehension(std::move(first));
            expect_op(")");
            return comp;
        }
        if (accept_op(")")) return first;
        auto tuple = make_expr(ExprKind::Tuple, open);
        tuple->items.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(")")) break;
            tuple->items.push_back(star_or_named());
        }
        expect_op(")");
        return tuple;
    }

    ExprPtr list_display() {
        auto list = make_expr(ExprKind::List, cur());
        ++pos_;
        if (accept_op("]")) return list;
        ExprPtr first = star_or_named();
        if (at_kw("for") || at_kw("async")) {
            ExprPtr comp = comprehension(std::move(first));
            expect_op("]");
            return comp;
        }
        list->items.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) break;
            list->items.push_back(star_or_named());
        }
        expect_op("]");
        return list;
    }

    ExprPtr brace_display() {
        const Token& open = cur();
        ++pos_;
        auto dict = make_expr(ExprKind::Dict, open);
        if (accept_op("}")) return dict;
        // First entry decides dict vs set.
        if (accept_op("**")) {
            dict->dict_items.push_back(DictItem{nullptr, expr()});
        } else {
            ExprPtr first = star_or_named();
            if (accept_op(":")) {
                ExprPtr value = test();
                if (at_kw("for") || at_kw("async")) {
                    auto comp = comprehension(std::move(value));
                    comp->items.push_back(std::move(first));
                    expect_op("}");
                    return comp;
                }
                dict->dict_items.push_back(DictItem{std::move(first), std::move(value)});
            } else {
                auto set = make_expr(ExprKind::Set, open);
                if (at_kw("for") || at_kw("async")) {
                    ExprPtr comp = comprehension(std::move(first));
                    expect_op("}");
                    return comp;
                }
                set->items.push_back(std::move(first));
                while (accept_op(",")) {
                    if (at_op("}")) break;
                    set->items.push_back(star_or_named());
                }
                expect_op("}");
                return set;
            }
        }
        while (accept_op(",")) {
            if (at_op("}")) break;
            if (accept_op("**")) {
                dict->dict_items.push_back(DictItem{nullptr, expr()});
                continue;
            }
            ExprPtr key = test();
            expect_op(":");
            dict->dict_items.push_back(DictItem{std::move(key), test()});
        }
        expect_op("}");
        return dict;
    }

    ExprPtr interpolation(const FStringPart& part) {
        SourceLocation sub = ctx_;
        Diagnostics scratch;
        std::vector<Token> toks = tokenize("(" + part.text + ")", sub, scratch);
        for (auto& tk : toks) {
            if (tk.line == 1) tk.column = tk.column + part.column - 2;
            tk.line += part.line - 1;
        }
        try {
            Parser nested(std::move(toks), ctx_, scratch);
            return nested.standalone_expression();
        } catch (const Fail&) {
            auto e = make_expr(ExprKind::Opaque, part.line, part.column);
            e->text = "interpolation";
            return e;
        }
    }

    ExprPtr strings() {
        const Token& first = cur();
        std::vector<ExprPtr> parts;
        bool any_f = false;
        bool any_bytes = false;
        std::string plain;
        while (at(TokenKind::String)) {
            const Token& t = cur();
            any_bytes = any_bytes || t.is_bytes;
            if (!t.is_fstring) {
                auto s = make_expr(ExprKind::Str, t);
                s->text = t.text;
                parts.push_back(std::move(s));
            } else {
                any_f = true;
                for (const auto& p : t.fparts) {
                    if (!p.is_expr) {
                        auto s = make_expr(ExprKind::Str, p.line, p.column);
                        s->text = p.text;
                        parts.push_back(std::move(s));
                        continue;
                    }
                    auto fv = make_expr(ExprKind::FormattedValue, p.line, p.column);
                    fv->text = p.conversion;
                    fv->spec = p.format_spec;
                    fv->items.push_back(interpolation(p));
                    parts.push_back(std::move(fv));
                }
            }
            ++pos_;
        }
        if (!any_f) {
            auto s = make_expr(ExprKind::Str, first);
            s->is_bytes = any_bytes;
            for (const auto& p : parts) s->text += p->text;
            return s;
        }
        auto joined = make_expr(ExprKind::JoinedStr, first);
        joined->items = std::move(parts);
        return joined;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    SourceLocation ctx_;
    Diagnostics& diags_;
};

}  // namespace

std::string module_name_for_path(std::string_view path, bool* is_package) {
    std::string p(path);
    if (text::ends_with(p, ".py")) p.resize(p.size() - 3);
    bool package = false;
    if (p == "__init__") {
        p.clear();
        package = true;
    } else if (text::ends_with(p, "/__init__")) {
        p.resize(p.size() - 9);
        package = true;
    }
    std::replace(p.begin(), p.end(), '/', '.');
    if (is_package) *is_package = package;
    return p;
}

Module parse_module(std::string_view content, const std::string& path, Diagnostics& diags,
                    const std::optional<std::string>& commit_id) {
    SourceLocation ctx{commit_id, path, 1, std::nullopt};
    Module m;
    m.path = path;
    m.name = module_name_for_path(path, &m.is_package);
    Parser parser(tokenize(content, ctx, diags), ctx, diags);
    m.body = parser.module();
    return m;
}

}  // namespace harvest::pyflow
