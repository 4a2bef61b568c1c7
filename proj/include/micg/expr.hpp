#pragma once

// Small expression language shared by indicator cut-off rules and custom metric presets.
//
//   expr       := or
//   or         := and   (("OR" | "||") and)*
//   and        := not   (("AND" | "&&") not)*
//   not        := ("NOT" | "!") not | comparison
//   comparison := sum   (("<" | "<=" | ">" | ">=" | "==" | "!=") sum)?
//   sum        := prod  (("+" | "-") prod)*
//   prod       := unary (("*" | "/") unary)*
//   unary      := "-" unary | power
//   power      := atom  ("^" unary)?
//   atom       := number | 'text' | "text" | name | name "(" expr ("," expr)* ")" | "(" expr ")"
//
// Keywords are case-insensitive. Names resolve to variables bound through `Expr::bind`.
// Any missing operand makes the whole expression missing.

#include "micg/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace micg {

struct Missing {
    friend bool operator==(Missing, Missing) = default;
};

/// Cell or expression value: missing, number, categorical text or truth value.
using Value = std::variant<Missing, double, std::string, bool>;

inline bool is_missing(const Value &v) { return std::holds_alternative<Missing>(v); }

class Expr {
public:
    enum class Op : std::uint8_t {
        number, text, variable, call,
        neg, add, sub, mul, div, pow,
        lt, le, gt, ge, eq, ne,
        logical_and, logical_or, logical_not
    };

    static Expr parse(std::string_view source);

    /// Resolve every name against `variables` (by position). Throws on unknown names.
    void bind(std::span<const std::string> variables);

    /// Names referenced by the expression, in first-use order, without duplicates.
    std::vector<std::string> names() const;

    /// True when the top-level node yields a truth value (comparison or logical operator).
    bool is_boolean() const { return is_boolean_op(nodes_[root_].op); }

    /// Logical negation; missing stays missing.
    Expr negated() const;

    /// Evaluate with variable values in bind order.
    Value evaluate(std::span<const Value> variables) const { return eval(root_, variables); }

    /// Numeric shortcut; throws if the result is not a number.
    double evaluate_number(std::span<const Value> variables) const;

    const std::string &source() const { return source_; }

private:
    struct Node {
        Op op{};
        double number = 0.0;
        std::string text;      // literal text, variable or function name
        int slot = -1;         // bound variable index
        std::vector<int> args; // child node indices
    };

    static bool is_boolean_op(Op op) {
        return op >= Op::lt;
    }

    Value eval(int node, std::span<const Value> vars) const;

    std::string source_;
    std::vector<Node> nodes_;
    int root_ = -1;

    friend class ExprParser;
};

namespace detail {

struct Token {
    enum class Kind : std::uint8_t { number, text, name, symbol, end } kind{};
    std::string lexeme;
    double number = 0.0;
    std::size_t offset = 0;
};

inline std::string upper(std::string_view s) {
    std::string out(s);
    for (auto &c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto fail = [&](const std::string &msg) {
        throw SyntaxError(msg, out.size() + 1, i);
    };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.offset = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) {
                ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) {
                    ++k;
                }
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
                        ++j;
                    }
                }
            }
            tok.kind = Token::Kind::number;
            tok.lexeme = std::string(src.substr(i, j - i));
            auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, tok.number);
            if (ec != std::errc{} || ptr != src.data() + j) {
                fail("malformed number '" + tok.lexeme + "'");
            }
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '.')) {
                ++j;
            }
            tok.kind = Token::Kind::name;
            tok.lexeme = std::string(src.substr(i, j - i));
            i = j;
        } else if (c == '\'' || c == '"') {
            const std::size_t close = src.find(c, i + 1);
            if (close == std::string_view::npos) {
                fail("unterminated text literal");
            }
            tok.kind = Token::Kind::text;
            tok.lexeme = std::string(src.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            static constexpr std::string_view two[] = {"<=", ">=", "==", "!=", "&&", "||"};
            tok.kind = Token::Kind::symbol;
            bool matched = false;
            for (auto op : two) {
                if (src.substr(i, 2) == op) {
                    tok.lexeme = std::string(op);
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string_view("<>!+-*/^(),").find(c) == std::string_view::npos) {
                    fail(std::string("unexpected character '") + c + "'");
                }
                tok.lexeme = std::string(1, c);
                ++i;
            }
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = Token::Kind::end;
    end.offset = src.size();
    out.push_back(end);
    return out;
}

} // namespace detail

class ExprParser {
public:
    explicit ExprParser(std::string_view src) : tokens_{detail::tokenize(src)} {
        expr_.source_ = std::string(src);
    }

    Expr run() {
        expr_.root_ = parse_or();
        if (peek().kind != detail::Token::Kind::end) {
            fail("unexpected '" + peek().lexeme + "' after complete expression");
        }
        return std::move(expr_);
    }

private:
    using Op = Expr::Op;
    using Kind = detail::Token::Kind;

    const detail::Token &peek() const { return tokens_[pos_]; }

    [[noreturn]] void fail(const std::string &msg) const {
        throw SyntaxError(msg, pos_ + 1, tokens_[pos_].offset);
    }

    bool accept_symbol(std::string_view s) {
        if (peek().kind == Kind::symbol && peek().lexeme == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool accept_keyword(std::string_view upper_kw) {
        if (peek().kind == Kind::name && detail::upper(peek().lexeme) == upper_kw) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Expr::Node n) {
        expr_.nodes_.push_back(std::move(n));
        return static_cast<int>(expr_.nodes_.size()) - 1;
    }

    int binary(Op op, int lhs, int rhs) {
        Expr::Node n;
        n.op = op;
        n.args = {lhs, rhs};
        return add(std::move(n));
    }

    bool boolean(int node) const { return Expr::is_boolean_op(expr_.nodes_[node].op); }

    void require_boolean(int node, std::size_t at) {
        if (!boolean(node)) {
            throw SyntaxError("logical operator needs a comparison operand", at + 1,
                              tokens_[at].offset);
        }
    }

    void require_scalar(int node, std::size_t at) {
        if (boolean(node)) {
            throw SyntaxError("arithmetic or comparison on a truth value", at + 1,
                              tokens_[at].offset);
        }
    }

    int parse_or() {
        std::size_t at = pos_;
        int lhs = parse_and();
        while (accept_keyword("OR") || accept_symbol("||")) {
            require_boolean(lhs, at);
            at = pos_;
            int rhs = parse_and();
            require_boolean(rhs, at);
            lhs = binary(Op::logical_or, lhs, rhs);
        }
        return lhs;
    }

    int parse_and() {
        std::size_t at = pos_;
        int lhs = parse_not();
        while (accept_keyword("AND") || accept_symbol("&&")) {
            require_boolean(lhs, at);
            at = pos_;
            int rhs = parse_not();
            require_boolean(rhs, at);
            lhs = binary(Op::logical_and, lhs, rhs);
        }
        return lhs;
    }

    int parse_not() {
        if (accept_keyword("NOT") || accept_symbol("!")) {
            const std::size_t at = pos_;
            int operand = parse_not();
            require_boolean(operand, at);
            Expr::Node n;
            n.op = Op::logical_not;
            n.args = {operand};
            return add(std::move(n));
        }
        return parse_comparison();
    }

    int parse_comparison() {
        const std::size_t at = pos_;
        int lhs = parse_sum();
        static constexpr std::pair<std::string_view, Op> ops[] = {
            {"<=", Op::le}, {">=", Op::ge}, {"==", Op::eq},
            {"!=", Op::ne}, {"<", Op::lt},  {">", Op::gt}};
        for (auto [sym, op] : ops) {
            if (accept_symbol(sym)) {
                require_scalar(lhs, at);
                const std::size_t rhs_at = pos_;
                int rhs = parse_sum();
                require_scalar(rhs, rhs_at);
                return binary(op, lhs, rhs);
            }
        }
        return lhs;
    }

    int parse_sum() {
        int lhs = parse_product();
        while (true) {
            if (accept_symbol("+")) {
                lhs = binary(Op::add, lhs, parse_product());
            } else if (accept_symbol("-")) {
                lhs = binary(Op::sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        while (true) {
            if (accept_symbol("*")) {
                lhs = binary(Op::mul, lhs, parse_unary());
            } else if (accept_symbol("/")) {
                lhs = binary(Op::div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (accept_symbol("-")) {
            int operand = parse_unary();
            if (expr_.nodes_[operand].op == Op::number) {
                expr_.nodes_[operand].number = -expr_.nodes_[operand].number;
                return operand;
            }
            Expr::Node n;
            n.op = Op::neg;
            n.args = {operand};
            return add(std::move(n));
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_atom();
        if (accept_symbol("^")) {
            return binary(Op::pow, base, parse_unary());
        }
        return base;
    }

    int parse_atom() {
        const detail::Token tok = peek();
        switch (tok.kind) {
        case Kind::number: {
            ++pos_;
            Expr::Node n;
            n.op = Op::number;
            n.number = tok.number;
            return add(std::move(n));
        }
        case Kind::text: {
            ++pos_;
            Expr::Node n;
            n.op = Op::text;
            n.text = tok.lexeme;
            return add(std::move(n));
        }
        case Kind::name: {
            const auto kw = detail::upper(tok.lexeme);
            if (kw == "AND" || kw == "OR" || kw == "NOT") {
                fail("expected operand, found keyword '" + tok.lexeme + "'");
            }
            ++pos_;
            Expr::Node n;
            n.text = tok.lexeme;
            if (accept_symbol("(")) {
                n.op = Op::call;
                do {
                    const std::size_t at = pos_;
                    int arg = parse_or();
                    require_scalar(arg, at);
                    n.args.push_back(arg);
                } while (accept_symbol(","));
                if (!accept_symbol(")")) {
                    fail("expected ')' to close call of '" + tok.lexeme + "'");
                }
                if (!known_function(n.text, n.args.size())) {
                    throw SyntaxError("unknown function '" + n.text + "' with " +
                                          std::to_string(n.args.size()) + " argument(s)",
                                      pos_, tok.offset);
                }
            } else {
                n.op = Op::variable;
            }
            return add(std::move(n));
        }
        case Kind::symbol:
            if (accept_symbol("(")) {
                int inner = parse_or();
                if (!accept_symbol(")")) {
                    fail("expected ')'");
                }
                return inner;
            }
            fail("expected operand, found '" + tok.lexeme + "'");
        case Kind::end:
            fail("expected operand, found end of input");
        }
        fail("unreachable");
    }

    static bool known_function(const std::string &name, std::size_t arity) {
        static constexpr std::string_view unary[] = {"sqrt", "exp",  "log",  "sin",  "cos", "tan",
                                                     "sinh", "cosh", "tanh", "abs"};
        for (auto f : unary) {
            if (name == f) {
                return arity == 1;
            }
        }
        return (name == "min" || name == "max") && arity == 2;
    }

    std::vector<detail::Token> tokens_;
    std::size_t pos_ = 0;
    Expr expr_;
};

inline Expr Expr::parse(std::string_view source) { return ExprParser(source).run(); }

inline void Expr::bind(std::span<const std::string> variables) {
    for (auto &n : nodes_) {
        if (n.op != Op::variable) {
            continue;
        }
        n.slot = -1;
        for (std::size_t i = 0; i < variables.size(); ++i) {
            if (variables[i] == n.text) {
                n.slot = static_cast<int>(i);
                break;
            }
        }
        if (n.slot < 0) {
            throw ValidationError("expression '" + source_ + "' references unknown name '" + n.text + "'");
        }
    }
}

inline std::vector<std::string> Expr::names() const {
    // Depth-first from the root so the order follows the source text.
    std::vector<std::string> out;
    std::vector<int> stack{root_};
    std::vector<int> order;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        order.push_back(id);
        const auto &args = nodes_[id].args;
        for (auto it = args.rbegin(); it != args.rend(); ++it) {
            stack.push_back(*it);
        }
    }
    for (int id : order) {
        const auto &n = nodes_[id];
        if (n.op == Op::variable && std::find(out.begin(), out.end(), n.text) == out.end()) {
            out.push_back(n.text);
        }
    }
    return out;
}

inline Expr Expr::negated() const {
    if (!is_boolean()) {
        throw ValidationError("cannot negate non-boolean expression '" + source_ + "'");
    }
    Expr out = *this;
    Node n;
    n.op = Op::logical_not;
    n.args = {root_};
    out.nodes_.push_back(std::move(n));
    out.root_ = static_cast<int>(out.nodes_.size()) - 1;
    out.source_ = "NOT (" + source_ + ")";
    return out;
}

inline double Expr::evaluate_number(std::span<const Value> variables) const {
    Value v = evaluate(variables);
    if (const double *d = std::get_if<double>(&v)) {
        return *d;
    }
    throw ValidationError("expression '" + source_ + "' did not evaluate to a number");
}

inline Value Expr::eval(int id, std::span<const Value> vars) const {
    const Node &n = nodes_[id];
    auto number_of = [&](const Value &v) -> double {
        if (const double *d = std::get_if<double>(&v)) {
            return *d;
        }
        throw ValidationError("expression '" + source_ + "': arithmetic on a non-numeric value");
    };
    switch (n.op) {
    case Op::number:
        return n.number;
    case Op::text:
        return n.text;
    case Op::variable:
        if (n.slot < 0 || static_cast<std::size_t>(n.slot) >= vars.size()) {
            throw ValidationError("expression '" + source_ + "': unbound name '" + n.text + "'");
        }
        return vars[n.slot];
    case Op::call: {
        std::vector<double> a;
        for (int arg : n.args) {
            Value v = eval(arg, vars);
            if (is_missing(v)) {
                return Missing{};
            }
            a.push_back(number_of(v));
        }
        const auto &f = n.text;
        if (f == "sqrt") return std::sqrt(a[0]);
        if (f == "exp") return std::exp(a[0]);
        if (f == "log") return std::log(a[0]);
        if (f == "sin") return std::sin(a[0]);
        if (f == "cos") return std::cos(a[0]);
        if (f == "tan") return std::tan(a[0]);
        if (f == "sinh") return std::sinh(a[0]);
        if (f == "cosh") return std::cosh(a[0]);
        if (f == "tanh") return std::tanh(a[0]);
        if (f == "abs") return std::fabs(a[0]);
        if (f == "min") return std::min(a[0], a[1]);
        return std::max(a[0], a[1]);
    }
    case Op::neg: {
        Value v = eval(n.args[0], vars);
        if (is_missing(v)) {
            return Missing{};
        }
        return -number_of(v);
    }
    case Op::logical_not: {
        Value v = eval(n.args[0], vars);
        if (is_missing(v)) {
            return Missing{};
        }
        return !std::get<bool>(v);
    }
    default:
        break;
    }

    Value lhs = eval(n.args[0], vars);
    Value rhs = eval(n.args[1], vars);
    if (is_missing(lhs) || is_missing(rhs)) {
        return Missing{};
    }
    switch (n.op) {
    case Op::logical_and:
        return std::get<bool>(lhs) && std::get<bool>(rhs);
    case Op::logical_or:
        return std::get<bool>(lhs) || std::get<bool>(rhs);
    case Op::add:
        return number_of(lhs) + number_of(rhs);
    case Op::sub:
        return number_of(lhs) - number_of(rhs);
    case Op::mul:
        return number_of(lhs) * number_of(rhs);
    case Op::div:
        return number_of(lhs) / number_of(rhs);
    case Op::pow:
        return std::pow(number_of(lhs), number_of(rhs));
    default:
        break;
    }

    // Comparison: numbers compare numerically, text compares lexicographically.
    int cmp = 0;
    if (std::holds_alternative<double>(lhs) && std::holds_alternative<double>(rhs)) {
        const double a = std::get<double>(lhs);
        const double b = std::get<double>(rhs);
        cmp = a < b ? -1 : (a > b ? 1 : 0);
    } else if (std::holds_alternative<std::string>(lhs) && std::holds_alternative<std::string>(rhs)) {
        cmp = std::get<std::string>(lhs).compare(std::get<std::string>(rhs));
        cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    } else {
        throw ValidationError("expression '" + source_ + "': comparison between number and text");
    }
    switch (n.op) {
    case Op::lt: return cmp < 0;
    case Op::le: return cmp <= 0;
    case Op::gt: return cmp > 0;
    case Op::ge: return cmp >= 0;
    case Op::eq: return cmp == 0;
    default: return cmp != 0;
    }
}

} // namespace micg
