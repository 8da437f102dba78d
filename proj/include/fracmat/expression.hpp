#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fracmat/errors.hpp"

namespace fracmat {

/// Arithmetic expression in one variable `x` over + - * / ^, unary minus and
/// the functions exp, log, sqrt, sin, cos, abs, pow(., c).  Immutable after
/// parsing; evaluation raises EvalDomainError instead of producing NaN.
///
/// Grammar (whitespace-insensitive):
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := ['-'] power
///   power  := atom ['^' factor]
///   atom   := number | 'x' | func '(' expr [',' expr] ')' | '(' expr ')'
class Expression {
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sin, Cos, Abs };

    struct Node {
        Kind kind;
        double value = 0.0;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    using NodePtr = std::shared_ptr<const Node>;

public:
    static Expression parse(std::string_view src) {
        Parser p(src);
        NodePtr root = p.parse_expr();
        p.expect_end();
        return Expression(std::move(root));
    }

    double eval(double x) const { return eval_node(*root_, x); }

    /// Exact symbolic derivative; the node set is closed under
    /// differentiation (abs differentiates to u/abs(u) * u').
    Expression derivative() const { return Expression(diff(root_)); }

    /// Fully parenthesized rendering; parsing it back reproduces the tree.
    std::string to_string() const {
        std::string out;
        print(*root_, out);
        return out;
    }

    bool same_structure(const Expression& other) const { return same(*root_, *other.root_); }

    static Expression number(double v) { return Expression(make(Kind::Number, v)); }
    static Expression variable() { return Expression(make(Kind::Var)); }

private:
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    static NodePtr make(Kind k, double v = 0.0, NodePtr l = nullptr, NodePtr r = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->value = v;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    static bool is_number(const NodePtr& n, double v) {
        return n->kind == Kind::Number && n->value == v;
    }

    // --- evaluation -------------------------------------------------------

    static double checked(double v, const char* what) {
        if (!std::isfinite(v))
            throw EvalDomainError(std::string(what) + " produced a non-finite value");
        return v;
    }

    static double eval_node(const Node& n, double x) {
        switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Var: return x;
        case Kind::Neg: return -eval_node(*n.lhs, x);
        case Kind::Add: return checked(eval_node(*n.lhs, x) + eval_node(*n.rhs, x), "addition");
        case Kind::Sub: return checked(eval_node(*n.lhs, x) - eval_node(*n.rhs, x), "subtraction");
        case Kind::Mul: return checked(eval_node(*n.lhs, x) * eval_node(*n.rhs, x), "multiplication");
        case Kind::Div: {
            const double num = eval_node(*n.lhs, x);
            const double den = eval_node(*n.rhs, x);
            if (den == 0.0)
                throw EvalDomainError("division by zero");
            return checked(num / den, "division");
        }
        case Kind::Pow: {
            const double base = eval_node(*n.lhs, x);
            const double expo = eval_node(*n.rhs, x);
            if (base < 0.0 && expo != std::rint(expo))
                throw EvalDomainError("negative base with fractional exponent");
            if (base == 0.0 && expo < 0.0)
                throw EvalDomainError("zero base with negative exponent");
            return checked(std::pow(base, expo), "power");
        }
        case Kind::Exp: return checked(std::exp(eval_node(*n.lhs, x)), "exp");
        case Kind::Log: {
            const double v = eval_node(*n.lhs, x);
            if (v <= 0.0)
                throw EvalDomainError("log of a non-positive value");
            return std::log(v);
        }
        case Kind::Sqrt: {
            const double v = eval_node(*n.lhs, x);
            if (v < 0.0)
                throw EvalDomainError("sqrt of a negative value");
            return std::sqrt(v);
        }
        case Kind::Sin: return std::sin(eval_node(*n.lhs, x));
        case Kind::Cos: return std::cos(eval_node(*n.lhs, x));
        case Kind::Abs: return std::abs(eval_node(*n.lhs, x));
        }
        throw Error("corrupt expression node");
    }

    // --- differentiation --------------------------------------------------

    static NodePtr add(NodePtr a, NodePtr b) {
        if (is_number(a, 0.0)) return b;
        if (is_number(b, 0.0)) return a;
        return make(Kind::Add, 0.0, std::move(a), std::move(b));
    }
    static NodePtr sub(NodePtr a, NodePtr b) {
        if (is_number(b, 0.0)) return a;
        return make(Kind::Sub, 0.0, std::move(a), std::move(b));
    }
    static NodePtr mul(NodePtr a, NodePtr b) {
        if (is_number(a, 0.0) || is_number(b, 0.0)) return make(Kind::Number, 0.0);
        if (is_number(a, 1.0)) return b;
        if (is_number(b, 1.0)) return a;
        return make(Kind::Mul, 0.0, std::move(a), std::move(b));
    }
    static NodePtr div(NodePtr a, NodePtr b) {
        if (is_number(a, 0.0)) return a;
        if (is_number(b, 1.0)) return a;
        return make(Kind::Div, 0.0, std::move(a), std::move(b));
    }
    static NodePtr neg(NodePtr a) {
        if (is_number(a, 0.0)) return a;
        return make(Kind::Neg, 0.0, std::move(a));
    }
    static NodePtr pow_node(NodePtr a, NodePtr b) {
        if (is_number(b, 1.0)) return a;
        return make(Kind::Pow, 0.0, std::move(a), std::move(b));
    }

    static NodePtr diff(const NodePtr& n) {
        switch (n->kind) {
        case Kind::Number: return make(Kind::Number, 0.0);
        case Kind::Var: return make(Kind::Number, 1.0);
        case Kind::Neg: return neg(diff(n->lhs));
        case Kind::Add: return add(diff(n->lhs), diff(n->rhs));
        case Kind::Sub: return sub(diff(n->lhs), diff(n->rhs));
        case Kind::Mul: return add(mul(diff(n->lhs), n->rhs), mul(n->lhs, diff(n->rhs)));
        case Kind::Div:
            return div(sub(mul(diff(n->lhs), n->rhs), mul(n->lhs, diff(n->rhs))),
                       mul(n->rhs, n->rhs));
        case Kind::Pow: {
            if (n->rhs->kind == Kind::Number) {
                const double c = n->rhs->value;
                // c * u^(c-1) * u'
                return mul(mul(make(Kind::Number, c), pow_node(n->lhs, make(Kind::Number, c - 1.0))),
                           diff(n->lhs));
            }
            // u^v (v' log u + v u'/u)
            NodePtr u = n->lhs, v = n->rhs;
            NodePtr bracket = add(mul(diff(v), make(Kind::Log, 0.0, u)),
                                  mul(v, div(diff(u), u)));
            return mul(make(Kind::Pow, 0.0, u, v), bracket);
        }
        case Kind::Exp: return mul(make(Kind::Exp, 0.0, n->lhs), diff(n->lhs));
        case Kind::Log: return div(diff(n->lhs), n->lhs);
        case Kind::Sqrt:
            return div(diff(n->lhs), mul(make(Kind::Number, 2.0), make(Kind::Sqrt, 0.0, n->lhs)));
        case Kind::Sin: return mul(make(Kind::Cos, 0.0, n->lhs), diff(n->lhs));
        case Kind::Cos: return neg(mul(make(Kind::Sin, 0.0, n->lhs), diff(n->lhs)));
        case Kind::Abs:
            // sign(u) u', written as (u / abs(u)) u'
            return mul(div(n->lhs, make(Kind::Abs, 0.0, n->lhs)), diff(n->lhs));
        }
        throw Error("corrupt expression node");
    }

    // --- printing ---------------------------------------------------------

    static void print_number(double v, std::string& out) {
        char buf[40];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, res.ptr);
    }

    static void print(const Node& n, std::string& out) {
        switch (n.kind) {
        case Kind::Number:
            if (n.value < 0.0 || std::signbit(n.value)) {
                out += "(-";
                print_number(-n.value, out);
                out += ")";
            } else {
                print_number(n.value, out);
            }
            return;
        case Kind::Var: out += "x"; return;
        case Kind::Neg: out += "(-"; print(*n.lhs, out); out += ")"; return;
        case Kind::Add: binary(n, " + ", out); return;
        case Kind::Sub: binary(n, " - ", out); return;
        case Kind::Mul: binary(n, " * ", out); return;
        case Kind::Div: binary(n, " / ", out); return;
        case Kind::Pow: binary(n, "^", out); return;
        case Kind::Exp: call("exp", n, out); return;
        case Kind::Log: call("log", n, out); return;
        case Kind::Sqrt: call("sqrt", n, out); return;
        case Kind::Sin: call("sin", n, out); return;
        case Kind::Cos: call("cos", n, out); return;
        case Kind::Abs: call("abs", n, out); return;
        }
    }

    static void binary(const Node& n, const char* op, std::string& out) {
        out += "(";
        print(*n.lhs, out);
        out += op;
        print(*n.rhs, out);
        out += ")";
    }

    static void call(const char* name, const Node& n, std::string& out) {
        out += name;
        out += "(";
        print(*n.lhs, out);
        out += ")";
    }

    static bool same(const Node& a, const Node& b) {
        if (a.kind != b.kind)
            return false;
        if (a.kind == Kind::Number)
            return a.value == b.value;
        if (a.lhs && (!b.lhs || !same(*a.lhs, *b.lhs)))
            return false;
        if (a.rhs && (!b.rhs || !same(*a.rhs, *b.rhs)))
            return false;
        return (a.lhs == nullptr) == (b.lhs == nullptr) && (a.rhs == nullptr) == (b.rhs == nullptr);
    }

    // --- parsing ----------------------------------------------------------

    class Parser {
    public:
        explicit Parser(std::string_view src) : src_(src) {}

        NodePtr parse_expr() {
            NodePtr lhs = parse_term();
            for (;;) {
                skip_ws();
                if (consume('+'))
                    lhs = make(Kind::Add, 0.0, lhs, parse_term());
                else if (consume('-'))
                    lhs = make(Kind::Sub, 0.0, lhs, parse_term());
                else
                    return lhs;
            }
        }

        void expect_end() {
            skip_ws();
            if (pos_ != src_.size())
                throw ParseError(pos_, "end of input or an operator");
        }

    private:
        NodePtr parse_term() {
            NodePtr lhs = parse_factor();
            for (;;) {
                skip_ws();
                if (consume('*'))
                    lhs = make(Kind::Mul, 0.0, lhs, parse_factor());
                else if (consume('/'))
                    lhs = make(Kind::Div, 0.0, lhs, parse_factor());
                else
                    return lhs;
            }
        }

        NodePtr parse_factor() {
            skip_ws();
            if (consume('-'))
                return make(Kind::Neg, 0.0, parse_power());
            return parse_power();
        }

        NodePtr parse_power() {
            NodePtr base = parse_atom();
            skip_ws();
            if (consume('^'))
                return make(Kind::Pow, 0.0, base, parse_factor()); // right-associative
            return base;
        }

        NodePtr parse_atom() {
            skip_ws();
            if (pos_ >= src_.size())
                throw ParseError(pos_, "a number, 'x', a function call or '('");
            const char c = src_[pos_];
            if (c == '(') {
                ++pos_;
                NodePtr inner = parse_expr();
                expect(')');
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)))
                return parse_name();
            throw ParseError(pos_, "a number, 'x', a function call or '('");
        }

        NodePtr parse_number() {
            double v = 0.0;
            const char* begin = src_.data() + pos_;
            const char* end = src_.data() + src_.size();
            auto res = std::from_chars(begin, end, v);
            if (res.ec != std::errc())
                throw ParseError(pos_, "a numeric literal");
            pos_ = static_cast<std::size_t>(res.ptr - src_.data());
            return make(Kind::Number, v);
        }

        NodePtr parse_name() {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string_view name = src_.substr(start, pos_ - start);
            if (name == "x")
                return make(Kind::Var);
            Kind kind;
            bool two_args = false;
            if (name == "exp") kind = Kind::Exp;
            else if (name == "log") kind = Kind::Log;
            else if (name == "sqrt") kind = Kind::Sqrt;
            else if (name == "sin") kind = Kind::Sin;
            else if (name == "cos") kind = Kind::Cos;
            else if (name == "abs") kind = Kind::Abs;
            else if (name == "pow") { kind = Kind::Pow; two_args = true; }
            else throw ParseError(start, "'x' or one of exp, log, sqrt, sin, cos, abs, pow");
            expect('(');
            NodePtr first = parse_expr();
            if (two_args) {
                expect(',');
                NodePtr second = parse_expr();
                expect(')');
                return make(Kind::Pow, 0.0, first, second);
            }
            expect(')');
            return make(kind, 0.0, first);
        }

        void skip_ws() {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }

        bool consume(char c) {
            if (pos_ < src_.size() && src_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        void expect(char c) {
            skip_ws();
            if (!consume(c))
                throw ParseError(pos_, std::string("'") + c + "'");
        }

        std::string_view src_;
        std::size_t pos_ = 0;
    };

    NodePtr root_;
};

} // namespace fracmat
