#pragma once

// Arithmetic expression DSL for coefficient functions a^{ij}(x,y), b^j(x,y),
// c(x,y). Variables are x1..xN (slow) and y1..yN (fast/periodic). Trees are
// immutable after parse, so they can be evaluated concurrently.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghz/errors.hpp"

namespace ghz {

enum class BinOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
enum class Func : std::uint8_t { Sin, Cos, Exp, Tanh, Abs, Min, Max };

struct ExprNode;
using Expression = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind : std::uint8_t { Const, VarX, VarY, Neg, Bin, Call } kind;
    std::size_t offset = 0;   // byte offset in the source text
    double value = 0.0;       // Const
    int index = 0;            // VarX/VarY, 0-based
    BinOp op = BinOp::Add;    // Bin
    Func fn = Func::Sin;      // Call
    Expression a, b;          // children (b unused for Neg and 1-arg calls)
};

namespace detail {

inline Expression make_const(double v, std::size_t off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Const;
    n->value = v;
    n->offset = off;
    return n;
}

inline Expression make_var(bool is_x, int idx, std::size_t off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = is_x ? ExprNode::Kind::VarX : ExprNode::Kind::VarY;
    n->index = idx;
    n->offset = off;
    return n;
}

inline Expression make_neg(Expression c, std::size_t off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Neg;
    n->a = std::move(c);
    n->offset = off;
    return n;
}

inline Expression make_bin(BinOp op, Expression l, Expression r, std::size_t off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Bin;
    n->op = op;
    n->a = std::move(l);
    n->b = std::move(r);
    n->offset = off;
    return n;
}

inline Expression make_call(Func f, Expression a0, Expression a1, std::size_t off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Call;
    n->fn = f;
    n->a = std::move(a0);
    n->b = std::move(a1);
    n->offset = off;
    return n;
}

struct Token {
    enum class Type : std::uint8_t {
        Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End
    } type;
    std::size_t offset;
    double number = 0.0;
    std::string_view text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.type = Token::Type::End;
            return;
        }
        char c = src_[pos_];
        switch (c) {
            case '+': tok_.type = Token::Type::Plus; ++pos_; return;
            case '-': tok_.type = Token::Type::Minus; ++pos_; return;
            case '*': tok_.type = Token::Type::Star; ++pos_; return;
            case '/': tok_.type = Token::Type::Slash; ++pos_; return;
            case '^': tok_.type = Token::Type::Caret; ++pos_; return;
            case '(': tok_.type = Token::Type::LParen; ++pos_; return;
            case ')': tok_.type = Token::Type::RParen; ++pos_; return;
            case ',': tok_.type = Token::Type::Comma; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.data() + pos_;
            const char* end = src_.data() + src_.size();
            double v = 0.0;
            auto res = std::from_chars(begin, end, v);
            if (res.ec != std::errc{}) throw ParseError("malformed number", pos_, {"number"});
            tok_.type = Token::Type::Number;
            tok_.number = v;
            tok_.text = src_.substr(pos_, static_cast<std::size_t>(res.ptr - begin));
            pos_ += static_cast<std::size_t>(res.ptr - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.type = Token::Type::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_,
                         {"number", "identifier", "operator", "("});
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_{};
};

// Grammar (precedence low to high):
//   sum     := product (('+'|'-') product)*
//   product := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?          right-associative
//   atom    := number | pi | x<k> | y<k> | fn '(' sum [',' sum] ')' | '(' sum ')'
class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    Expression parse() {
        Expression e = sum();
        if (lex_.peek().type != Token::Type::End)
            throw ParseError("trailing input after expression", lex_.peek().offset, {"end of input"});
        return e;
    }

private:
    using TT = Token::Type;

    Expression sum() {
        Expression e = product();
        for (;;) {
            TT t = lex_.peek().type;
            if (t != TT::Plus && t != TT::Minus) return e;
            Token op = lex_.take();
            e = make_bin(t == TT::Plus ? BinOp::Add : BinOp::Sub, e, product(), op.offset);
        }
    }

    Expression product() {
        Expression e = unary();
        for (;;) {
            TT t = lex_.peek().type;
            if (t != TT::Star && t != TT::Slash) return e;
            Token op = lex_.take();
            e = make_bin(t == TT::Star ? BinOp::Mul : BinOp::Div, e, unary(), op.offset);
        }
    }

    Expression unary() {
        if (lex_.peek().type == TT::Minus) {
            Token op = lex_.take();
            return make_neg(unary(), op.offset);
        }
        return power();
    }

    Expression power() {
        Expression base = atom();
        if (lex_.peek().type == TT::Caret) {
            Token op = lex_.take();
            return make_bin(BinOp::Pow, base, unary(), op.offset);
        }
        return base;
    }

    Expression atom() {
        Token t = lex_.take();
        switch (t.type) {
            case TT::Number:
                return make_const(t.number, t.offset);
            case TT::LParen: {
                Expression e = sum();
                expect(TT::RParen, ")");
                return e;
            }
            case TT::Ident:
                return ident(t);
            default:
                throw ParseError("expected an operand", t.offset,
                                 {"number", "identifier", "(", "-"});
        }
    }

    Expression ident(const Token& t) {
        std::string_view s = t.text;
        if (s == "pi") return make_const(3.14159265358979323846, t.offset);
        if ((s[0] == 'x' || s[0] == 'y') && s.size() > 1) {
            int idx = 0;
            auto res = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
            if (res.ec == std::errc{} && res.ptr == s.data() + s.size() && idx >= 1)
                return make_var(s[0] == 'x', idx - 1, t.offset);
        }
        Func f;
        int arity;
        if (s == "sin") { f = Func::Sin; arity = 1; }
        else if (s == "cos") { f = Func::Cos; arity = 1; }
        else if (s == "exp") { f = Func::Exp; arity = 1; }
        else if (s == "tanh") { f = Func::Tanh; arity = 1; }
        else if (s == "abs") { f = Func::Abs; arity = 1; }
        else if (s == "min") { f = Func::Min; arity = 2; }
        else if (s == "max") { f = Func::Max; arity = 2; }
        else {
            throw ParseError("unknown identifier '" + std::string(s) + "'", t.offset,
                             {"x<k>", "y<k>", "pi", "sin", "cos", "exp", "tanh", "abs", "min", "max"});
        }
        expect(TT::LParen, "(");
        Expression a0 = sum();
        Expression a1;
        if (arity == 2) {
            expect(TT::Comma, ",");
            a1 = sum();
        }
        expect(TT::RParen, ")");
        return make_call(f, std::move(a0), std::move(a1), t.offset);
    }

    void expect(TT type, const char* what) {
        if (lex_.peek().type != type)
            throw ParseError(std::string("expected '") + what + "'", lex_.peek().offset, {what});
        lex_.take();
    }

    Lexer lex_;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text) {
    if (text.empty()) throw ParseError("empty expression", 0, {"expression"});
    return detail::Parser(text).parse();
}

/// Evaluate at slow point x and fast point y. IEEE double arithmetic,
/// children left to right.
inline double evaluate(const ExprNode& e, std::span<const double> x, std::span<const double> y) {
    switch (e.kind) {
        case ExprNode::Kind::Const:
            return e.value;
        case ExprNode::Kind::VarX:
            if (static_cast<std::size_t>(e.index) >= x.size())
                throw EvalError("variable x" + std::to_string(e.index + 1) + " out of range", e.offset);
            return x[static_cast<std::size_t>(e.index)];
        case ExprNode::Kind::VarY:
            if (static_cast<std::size_t>(e.index) >= y.size())
                throw EvalError("variable y" + std::to_string(e.index + 1) + " out of range", e.offset);
            return y[static_cast<std::size_t>(e.index)];
        case ExprNode::Kind::Neg:
            return -evaluate(*e.a, x, y);
        case ExprNode::Kind::Bin: {
            double l = evaluate(*e.a, x, y);
            double r = evaluate(*e.b, x, y);
            switch (e.op) {
                case BinOp::Add: return l + r;
                case BinOp::Sub: return l - r;
                case BinOp::Mul: return l * r;
                case BinOp::Div:
                    if (r == 0.0) throw EvalError("division by zero", e.offset);
                    return l / r;
                case BinOp::Pow: {
                    if (l == 0.0 && r < 0.0) throw EvalError("0 raised to a negative power", e.offset);
                    if (l < 0.0 && r != std::nearbyint(r))
                        throw EvalError("negative base with non-integer exponent", e.offset);
                    return std::pow(l, r);
                }
            }
            break;
        }
        case ExprNode::Kind::Call: {
            double a0 = evaluate(*e.a, x, y);
            switch (e.fn) {
                case Func::Sin: return std::sin(a0);
                case Func::Cos: return std::cos(a0);
                case Func::Exp: return std::exp(a0);
                case Func::Tanh: return std::tanh(a0);
                case Func::Abs: return std::fabs(a0);
                case Func::Min: return std::fmin(a0, evaluate(*e.b, x, y));
                case Func::Max: return std::fmax(a0, evaluate(*e.b, x, y));
            }
            break;
        }
    }
    throw EvalError("corrupt expression node", e.offset);
}

inline double evaluate(const Expression& e, std::span<const double> x, std::span<const double> y) {
    return evaluate(*e, x, y);
}

inline bool tree_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprNode::Kind::Const:
            // bit-for-bit, so printing/parsing can be checked exactly
            return a.value == b.value || (std::isnan(a.value) && std::isnan(b.value));
        case ExprNode::Kind::VarX:
        case ExprNode::Kind::VarY:
            return a.index == b.index;
        case ExprNode::Kind::Neg:
            return tree_equal(*a.a, *b.a);
        case ExprNode::Kind::Bin:
            return a.op == b.op && tree_equal(*a.a, *b.a) && tree_equal(*a.b, *b.b);
        case ExprNode::Kind::Call:
            if (a.fn != b.fn || !tree_equal(*a.a, *b.a)) return false;
            return (a.b == nullptr) == (b.b == nullptr) && (a.b == nullptr || tree_equal(*a.b, *b.b));
    }
    return false;
}

inline bool tree_equal(const Expression& a, const Expression& b) { return tree_equal(*a, *b); }

namespace detail {

inline int precedence(const ExprNode& e) {
    switch (e.kind) {
        case ExprNode::Kind::Bin:
            switch (e.op) {
                case BinOp::Add:
                case BinOp::Sub: return 1;
                case BinOp::Mul:
                case BinOp::Div: return 2;
                case BinOp::Pow: return 4;
            }
            return 0;
        case ExprNode::Kind::Neg: return 3;
        default: return 5;  // atoms never need parens
    }
}

inline void print_number(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline void print_rec(std::string& out, const ExprNode& e);

inline void print_child(std::string& out, const ExprNode& c, int min_prec) {
    bool parens = precedence(c) < min_prec;
    // negative literals re-lex as Neg(number); parenthesize to keep trees stable
    if (c.kind == ExprNode::Kind::Const && c.value < 0 && min_prec > 1) parens = true;
    if (parens) out.push_back('(');
    print_rec(out, c);
    if (parens) out.push_back(')');
}

inline void print_rec(std::string& out, const ExprNode& e) {
    switch (e.kind) {
        case ExprNode::Kind::Const:
            print_number(out, e.value);
            return;
        case ExprNode::Kind::VarX:
            out += "x" + std::to_string(e.index + 1);
            return;
        case ExprNode::Kind::VarY:
            out += "y" + std::to_string(e.index + 1);
            return;
        case ExprNode::Kind::Neg:
            out.push_back('-');
            print_child(out, *e.a, 3);
            return;
        case ExprNode::Kind::Bin: {
            const char* op = nullptr;
            int prec = precedence(e);
            int lmin = prec, rmin = prec + 1;
            switch (e.op) {
                case BinOp::Add: op = " + "; break;
                case BinOp::Sub: op = " - "; break;
                case BinOp::Mul: op = "*"; break;
                case BinOp::Div: op = "/"; break;
                case BinOp::Pow:
                    op = "^";
                    lmin = prec + 1;  // (a^b)^c keeps parens, a^b^c is right-assoc
                    rmin = 3;         // exponent may be a bare unary minus
                    break;
            }
            print_child(out, *e.a, lmin);
            out += op;
            print_child(out, *e.b, rmin);
            return;
        }
        case ExprNode::Kind::Call: {
            const char* name = nullptr;
            switch (e.fn) {
                case Func::Sin: name = "sin"; break;
                case Func::Cos: name = "cos"; break;
                case Func::Exp: name = "exp"; break;
                case Func::Tanh: name = "tanh"; break;
                case Func::Abs: name = "abs"; break;
                case Func::Min: name = "min"; break;
                case Func::Max: name = "max"; break;
            }
            out += name;
            out.push_back('(');
            print_rec(out, *e.a);
            if (e.b) {
                out += ", ";
                print_rec(out, *e.b);
            }
            out.push_back(')');
            return;
        }
    }
}

}  // namespace detail

/// Canonical text form; parse_expression(print(e)) yields an identical tree.
inline std::string print(const Expression& e) {
    std::string out;
    detail::print_rec(out, *e);
    return out;
}

/// Largest 1-based variable index used on the given axis (0 if unused).
inline int max_var_index(const ExprNode& e, bool x_axis) {
    int m = 0;
    if ((e.kind == ExprNode::Kind::VarX && x_axis) || (e.kind == ExprNode::Kind::VarY && !x_axis))
        m = e.index + 1;
    if (e.a) m = std::max(m, max_var_index(*e.a, x_axis));
    if (e.b) m = std::max(m, max_var_index(*e.b, x_axis));
    return m;
}

/// True if the tree references any y variable.
inline bool uses_fast_variable(const ExprNode& e) { return max_var_index(e, false) > 0; }

}  // namespace ghz
