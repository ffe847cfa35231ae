#ifndef BLOWUP_EXPR_HPP
#define BLOWUP_EXPR_HPP

// Small arithmetic expression language for user-supplied perturbations.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | '+' unary | power
//   power  := atom ('^' unary)?          (right associative, binds tighter than unary minus)
//   atom   := number | variable | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := abs | sign | exp | log | sin | cos | tanh
//
// Variables are declared by the caller, e.g. {"u"} for f or {"x","t","v","z"} for g.

#include <blowup/error.hpp>

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace blowup
{

class Expression
{
  public:
    Expression() = default;

    static Expression parse(const std::string &source, std::vector<std::string> variables)
    {
        Expression e;
        e.source_ = source;
        e.variables_ = std::move(variables);
        Parser parser{source, e.variables_, 0, e.nodes_};
        const int root = parser.parse_expr();
        parser.skip_ws();
        if (parser.pos != source.size()) {
            fail(ErrorCode::ParseError, "unexpected '" + std::string(1, source[parser.pos])
                                            + "' at offset " + std::to_string(parser.pos) + " in '"
                                            + source + "'");
        }
        e.root_ = root;
        return e;
    }

    [[nodiscard]] bool empty() const noexcept { return root_ < 0; }
    [[nodiscard]] const std::string &source() const noexcept { return source_; }
    [[nodiscard]] const std::vector<std::string> &variables() const noexcept { return variables_; }

    [[nodiscard]] double operator()(std::span<const double> values) const
    {
        if (root_ < 0) {
            return 0.0;
        }
        return eval(root_, values);
    }

  private:
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Abs, Sign, Exp, Log, Sin, Cos, Tanh };

    struct Node {
        Op op;
        double value = 0.0;
        int index = 0;
        int lhs = -1;
        int rhs = -1;
    };

    struct Parser {
        const std::string &src;
        const std::vector<std::string> &vars;
        std::size_t pos;
        std::vector<Node> &nodes;

        int push(Node n)
        {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }

        void skip_ws()
        {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) {
                ++pos;
            }
        }

        bool accept(char c)
        {
            skip_ws();
            if (pos < src.size() && src[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        int parse_expr()
        {
            int lhs = parse_term();
            for (;;) {
                if (accept('+')) {
                    lhs = push({Op::Add, 0.0, 0, lhs, parse_term()});
                } else if (accept('-')) {
                    lhs = push({Op::Sub, 0.0, 0, lhs, parse_term()});
                } else {
                    return lhs;
                }
            }
        }

        int parse_term()
        {
            int lhs = parse_unary();
            for (;;) {
                if (accept('*')) {
                    lhs = push({Op::Mul, 0.0, 0, lhs, parse_unary()});
                } else if (accept('/')) {
                    lhs = push({Op::Div, 0.0, 0, lhs, parse_unary()});
                } else {
                    return lhs;
                }
            }
        }

        int parse_unary()
        {
            if (accept('-')) {
                return push({Op::Neg, 0.0, 0, parse_unary(), -1});
            }
            if (accept('+')) {
                return parse_unary();
            }
            return parse_power();
        }

        int parse_power()
        {
            const int base = parse_atom();
            if (accept('^')) {
                return push({Op::Pow, 0.0, 0, base, parse_unary()});
            }
            return base;
        }

        int parse_atom()
        {
            skip_ws();
            if (pos >= src.size()) {
                fail(ErrorCode::ParseError, "unexpected end of expression '" + src + "'");
            }
            const char c = src[pos];
            if (c == '(') {
                ++pos;
                const int inner = parse_expr();
                if (!accept(')')) {
                    fail(ErrorCode::ParseError, "missing ')' in '" + src + "'");
                }
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                const double v = std::stod(src.substr(pos), &used);
                pos += used;
                return push({Op::Const, v, 0, -1, -1});
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < src.size()
                       && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
                    ++pos;
                }
                const std::string name = src.substr(start, pos - start);
                for (std::size_t i = 0; i < vars.size(); ++i) {
                    if (vars[i] == name) {
                        return push({Op::Var, 0.0, static_cast<int>(i), -1, -1});
                    }
                }
                if (name == "pi") {
                    return push({Op::Const, std::numbers::pi, 0, -1, -1});
                }
                const Op fn = function_op(name);
                if (!accept('(')) {
                    fail(ErrorCode::ParseError, "expected '(' after function '" + name + "'");
                }
                const int arg = parse_expr();
                if (!accept(')')) {
                    fail(ErrorCode::ParseError, "missing ')' after argument of '" + name + "'");
                }
                return push({fn, 0.0, 0, arg, -1});
            }
            fail(ErrorCode::ParseError, "unexpected '" + std::string(1, c) + "' in '" + src + "'");
        }

        Op function_op(const std::string &name) const
        {
            if (name == "abs") return Op::Abs;
            if (name == "sign") return Op::Sign;
            if (name == "exp") return Op::Exp;
            if (name == "log") return Op::Log;
            if (name == "sin") return Op::Sin;
            if (name == "cos") return Op::Cos;
            if (name == "tanh") return Op::Tanh;
            fail(ErrorCode::ParseError, "unknown identifier '" + name + "' in '" + src + "'");
        }
    };

    [[nodiscard]] double eval(int id, std::span<const double> x) const
    {
        const Node &n = nodes_[static_cast<std::size_t>(id)];
        switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return x[static_cast<std::size_t>(n.index)];
        case Op::Neg: return -eval(n.lhs, x);
        case Op::Add: return eval(n.lhs, x) + eval(n.rhs, x);
        case Op::Sub: return eval(n.lhs, x) - eval(n.rhs, x);
        case Op::Mul: return eval(n.lhs, x) * eval(n.rhs, x);
        case Op::Div: return eval(n.lhs, x) / eval(n.rhs, x);
        case Op::Pow: return std::pow(eval(n.lhs, x), eval(n.rhs, x));
        case Op::Abs: return std::abs(eval(n.lhs, x));
        case Op::Sign: {
            const double a = eval(n.lhs, x);
            return (a > 0.0) - (a < 0.0);
        }
        case Op::Exp: return std::exp(eval(n.lhs, x));
        case Op::Log: return std::log(eval(n.lhs, x));
        case Op::Sin: return std::sin(eval(n.lhs, x));
        case Op::Cos: return std::cos(eval(n.lhs, x));
        case Op::Tanh: return std::tanh(eval(n.lhs, x));
        }
        return 0.0;
    }

    std::string source_;
    std::vector<std::string> variables_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace blowup

#endif
