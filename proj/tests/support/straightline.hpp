#pragma once

// Random straight-line Python programs over string variables, with a direct
// interpreter that evaluates the generated statement list.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace harvest::testing {

struct Operand {
    bool is_var = false;
    std::string text;  // variable name or literal value
};

struct Statement {
    enum class Op { Literal, Copy, Concat, AugConcat, FString, Percent, Format, Join, IntStr };
    Op op = Op::Literal;
    std::string target;
    std::vector<Operand> args;
    std::string glue;  // separator for FString / Percent / Format / Join
    long number = 0;
};

struct StraightLineProgram {
    std::vector<Statement> statements;

    std::string render() const;
    /// Final value of every assigned variable.
    std::map<std::string, std::string> interpret() const;
};

inline std::string py_literal(const std::string& s) { return "\"" + s + "\""; }

inline std::string render_operand(const Operand& o) { return o.is_var ? o.text : py_literal(o.text); }

inline std::string StraightLineProgram::render() const {
    std::string out = "# generated\n";
    for (const auto& s : statements) {
        switch (s.op) {
            case Statement::Op::Literal:
                out += s.target + " = " + py_literal(s.args[0].text) + "\n";
                break;
            case Statement::Op::Copy:
                out += s.target + " = " + s.args[0].text + "\n";
                break;
            case Statement::Op::Concat: {
                out += s.target + " =";
                for (std::size_t i = 0; i < s.args.size(); ++i) out += (i ? " + " : " ") + render_operand(s.args[i]);
                out += "\n";
                break;
            }
            case Statement::Op::AugConcat:
                out += s.target + " += " + render_operand(s.args[0]) + "\n";
                break;
            case Statement::Op::FString: {
                out += s.target + " = f\"";
                for (std::size_t i = 0; i < s.args.size(); ++i) {
                    if (i) out += s.glue;
                    out += s.args[i].is_var ? "{" + s.args[i].text + "}" : s.args[i].text;
                }
                out += "\"\n";
                break;
            }
            case Statement::Op::Percent: {
                std::string fmt;
                std::string values;
                for (std::size_t i = 0; i < s.args.size(); ++i) {
                    fmt += (i ? s.glue : "") + "%s";
                    values += (i ? ", " : "") + render_operand(s.args[i]);
                }
                out += s.target + " = " + py_literal(fmt) + " % (" + values + (s.args.size() == 1 ? ",)" : ")") + "\n";
                break;
            }
            case Statement::Op::Format: {
                std::string fmt;
                std::string values;
                for (std::size_t i = 0; i < s.args.size(); ++i) {
                    fmt += (i ? s.glue : "") + "{}";
                    values += (i ? ", " : "") + render_operand(s.args[i]);
                }
                out += s.target + " = " + py_literal(fmt) + ".format(" + values + ")\n";
                break;
            }
            case Statement::Op::Join: {
                std::string values;
                for (std::size_t i = 0; i < s.args.size(); ++i) values += (i ? ", " : "") + render_operand(s.args[i]);
                out += s.target + " = " + py_literal(s.glue) + ".join([" + values + "])\n";
                break;
            }
            case Statement::Op::IntStr:
                out += s.target + " = str(" + std::to_string(s.number) + ")\n";
                break;
        }
    }
    return out;
}

inline std::map<std::string, std::string> StraightLineProgram::interpret() const {
    std::map<std::string, std::string> env;
    auto value = [&](const Operand& o) { return o.is_var ? env.at(o.text) : o.text; };
    for (const auto& s : statements) {
        std::string result;
        switch (s.op) {
            case Statement::Op::Literal:
            case Statement::Op::Copy:
                result = value(s.args[0]);
                break;
            case Statement::Op::Concat:
                for (const auto& a : s.args) result += value(a);
                break;
            case Statement::Op::AugConcat:
                result = env.at(s.target) + value(s.args[0]);
                break;
            case Statement::Op::FString:
            case Statement::Op::Percent:
            case Statement::Op::Format:
            case Statement::Op::Join:
                for (std::size_t i = 0; i < s.args.size(); ++i) result += (i ? s.glue : "") + value(s.args[i]);
                break;
            case Statement::Op::IntStr:
                result = std::to_string(s.number);
                break;
        }
        env[s.target] = result;
    }
    return env;
}

class StraightLineGenerator {
public:
    explicit StraightLineGenerator(std::uint64_t seed) : rng_(seed) {}

    StraightLineProgram next() {
        StraightLineProgram p;
        std::vector<std::string> defined;
        const std::size_t count = 1 + pick(14);
        for (std::size_t n = 0; n < count; ++n) {
            Statement s;
            const bool reuse = !defined.empty() && pick(4) == 0;
            s.target = reuse ? defined[pick(defined.size())] : "v" + std::to_string(defined.size());
            auto operand = [&]() {
                Operand o;
                if (!defined.empty() && pick(3) != 0) {
                    o.is_var = true;
                    o.text = defined[pick(defined.size())];
                } else {
                    o.text = literal();
                }
                return o;
            };
            const std::size_t kind = defined.empty() ? (pick(2) ? 0 : 8) : pick(9);
            switch (kind) {
                case 0:
                    s.op = Statement::Op::Literal;
                    s.args.push_back(Operand{false, literal()});
                    break;
                case 1:
                    s.op = Statement::Op::Copy;
                    s.args.push_back(Operand{true, defined[pick(defined.size())]});
                    break;
                case 2:
                    s.op = Statement::Op::Concat;
                    for (std::size_t i = 0, k = 2 + pick(3); i < k; ++i) s.args.push_back(operand());
                    break;
                case 3:
                    if (!reuse) {
                        s.op = Statement::Op::Concat;
                        s.args = {operand(), operand()};
                        break;
                    }
                    s.op = Statement::Op::AugConcat;
                    s.args.push_back(operand());
                    break;
                case 4:
                    s.op = Statement::Op::FString;
                    s.glue = glue();
                    for (std::size_t i = 0, k = 1 + pick(3); i < k; ++i) s.args.push_back(operand());
                    break;
                case 5:
                    s.op = Statement::Op::Percent;
                    s.glue = glue();
                    for (std::size_t i = 0, k = 1 + pick(3); i < k; ++i) s.args.push_back(operand());
                    break;
                case 6:
                    s.op = Statement::Op::Format;
                    s.glue = glue();
                    for (std::size_t i = 0, k = 1 + pick(3); i < k; ++i) s.args.push_back(operand());
                    break;
                case 7:
                    s.op = Statement::Op::Join;
                    s.glue = glue();
                    for (std::size_t i = 0, k = 1 + pick(3); i < k; ++i) s.args.push_back(operand());
                    break;
                default:
                    s.op = Statement::Op::IntStr;
                    s.number = static_cast<long>(pick(100000));
                    break;
            }
            if (!reuse) defined.push_back(s.target);
            p.statements.push_back(std::move(s));
        }
        return p;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    // No quotes, backslashes, braces or percent signs, so the same text is a
    // valid plain, f-string, %-format and str.format literal.
    std::string literal() {
        static const std::string alphabet =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-:/@.=;,!#$&*+?";
        std::string out;
        for (std::size_t i = 0, n = pick(12); i < n; ++i) out.push_back(alphabet[pick(alphabet.size())]);
        return out;
    }

    std::string glue() {
        static const std::vector<std::string> glues{"", ":", "@", "/", "-", "://", " ", ";"};
        return glues[pick(glues.size())];
    }

    std::mt19937_64 rng_;
};

}  // namespace harvest::testing
