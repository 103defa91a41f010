#include "blowup/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Abs, Sqrt, Sin, Cos, Sign };

}  // namespace

struct FunctionExpr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using Node = FunctionExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

const char* op_name(Op op) {
    switch (op) {
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Abs: return "abs";
        case Op::Sqrt: return "sqrt";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Sign: return "sign";
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Pow: return "^";
        case Op::Neg: return "unary -";
        case Op::Const: return "constant";
        case Op::Var: return "variable";
    }
    return "?";
}

[[noreturn]] void domain_fail(Op op, const std::string& why, double at) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", at);
    throw DomainError(std::string(op_name(op)) + ": " + why + " (argument " + buf + ")");
}

double checked(Op op, double result, double at) {
    if (std::isnan(result)) domain_fail(op, "indeterminate or undefined result", at);
    return result;
}

double eval_node(const Node& n, double x) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return x;
        case Op::Neg: return -eval_node(*n.lhs, x);
        case Op::Add: return checked(n.op, eval_node(*n.lhs, x) + eval_node(*n.rhs, x), x);
        case Op::Sub: return checked(n.op, eval_node(*n.lhs, x) - eval_node(*n.rhs, x), x);
        case Op::Mul: return checked(n.op, eval_node(*n.lhs, x) * eval_node(*n.rhs, x), x);
        case Op::Div: {
            const double num = eval_node(*n.lhs, x);
            const double den = eval_node(*n.rhs, x);
            if (den == 0.0) domain_fail(n.op, "pole (division by zero)", x);
            return checked(n.op, num / den, x);
        }
        case Op::Pow: {
            const double base = eval_node(*n.lhs, x);
            const double ex = eval_node(*n.rhs, x);
            if (base == 0.0 && ex < 0.0) domain_fail(n.op, "zero raised to a negative power", x);
            if (base < 0.0 && std::isfinite(ex) && std::trunc(ex) != ex)
                domain_fail(n.op, "negative base with non-integer exponent", x);
            return checked(n.op, std::pow(base, ex), x);
        }
        case Op::Exp: return checked(n.op, std::exp(eval_node(*n.lhs, x)), x);
        case Op::Log: {
            const double a = eval_node(*n.lhs, x);
            if (!(a > 0.0)) domain_fail(n.op, "non-positive argument", x);
            return std::log(a);
        }
        case Op::Abs: return std::fabs(eval_node(*n.lhs, x));
        case Op::Sqrt: {
            const double a = eval_node(*n.lhs, x);
            if (a < 0.0) domain_fail(n.op, "negative argument", x);
            return std::sqrt(a);
        }
        case Op::Sin: return checked(n.op, std::sin(eval_node(*n.lhs, x)), x);
        case Op::Cos: return checked(n.op, std::cos(eval_node(*n.lhs, x)), x);
        case Op::Sign: {
            const double a = eval_node(*n.lhs, x);
            return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Construction with light constant folding (no algebraic simplification).

NodePtr make(Op op, double value = 0.0, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    return std::make_shared<const Node>(Node{op, value, std::move(lhs), std::move(rhs)});
}

NodePtr constant(double v) { return make(Op::Const, v); }

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

NodePtr fold_or(NodePtr node) {
    if (node->lhs && node->lhs->op != Op::Const) return node;
    if (node->rhs && node->rhs->op != Op::Const) return node;
    if (!node->lhs) return node;
    try {
        const double v = eval_node(*node, 0.0);
        if (std::isfinite(v)) return constant(v);
    } catch (const DomainError&) {
    }
    return node;
}

NodePtr neg(NodePtr a) {
    if (a->op == Op::Const) return constant(-a->value);
    if (a->op == Op::Neg) return a->lhs;
    return make(Op::Neg, 0.0, std::move(a));
}

NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return fold_or(make(Op::Add, 0.0, std::move(a), std::move(b)));
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(std::move(b));
    return fold_or(make(Op::Sub, 0.0, std::move(a), std::move(b)));
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return fold_or(make(Op::Mul, 0.0, std::move(a), std::move(b)));
}

NodePtr div(NodePtr a, NodePtr b) {
    if (is_const(b, 1.0)) return a;
    return fold_or(make(Op::Div, 0.0, std::move(a), std::move(b)));
}

NodePtr pow(NodePtr a, NodePtr b) {
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return constant(1.0);
    return fold_or(make(Op::Pow, 0.0, std::move(a), std::move(b)));
}

NodePtr call(Op op, NodePtr a) { return fold_or(make(op, 0.0, std::move(a))); }

bool depends_on_var(const Node& n) {
    if (n.op == Op::Var) return true;
    if (n.lhs && depends_on_var(*n.lhs)) return true;
    if (n.rhs && depends_on_var(*n.rhs)) return true;
    return false;
}

NodePtr differentiate(const NodePtr& n) {
    switch (n->op) {
        case Op::Const: return constant(0.0);
        case Op::Var: return constant(1.0);
        case Op::Neg: return neg(differentiate(n->lhs));
        case Op::Add: return add(differentiate(n->lhs), differentiate(n->rhs));
        case Op::Sub: return sub(differentiate(n->lhs), differentiate(n->rhs));
        case Op::Mul:
            return add(mul(differentiate(n->lhs), n->rhs), mul(n->lhs, differentiate(n->rhs)));
        case Op::Div:
            return div(sub(mul(differentiate(n->lhs), n->rhs), mul(n->lhs, differentiate(n->rhs))),
                       mul(n->rhs, n->rhs));
        case Op::Pow: {
            const NodePtr& u = n->lhs;
            const NodePtr& v = n->rhs;
            if (!depends_on_var(*v)) {
                // c * u^(c-1) * u'
                return mul(mul(v, pow(u, sub(v, constant(1.0)))), differentiate(u));
            }
            if (!depends_on_var(*u)) {
                return mul(mul(n, call(Op::Log, u)), differentiate(v));
            }
            // u^v * (v' log u + v u' / u)
            return mul(n, add(mul(differentiate(v), call(Op::Log, u)), div(mul(v, differentiate(u)), u)));
        }
        case Op::Exp: return mul(n, differentiate(n->lhs));
        case Op::Log: return div(differentiate(n->lhs), n->lhs);
        case Op::Abs: return mul(call(Op::Sign, n->lhs), differentiate(n->lhs));
        case Op::Sqrt: return div(differentiate(n->lhs), mul(constant(2.0), n));
        case Op::Sin: return mul(call(Op::Cos, n->lhs), differentiate(n->lhs));
        case Op::Cos: return neg(mul(call(Op::Sin, n->lhs), differentiate(n->lhs)));
        case Op::Sign: return constant(0.0);
    }
    return constant(0.0);
}

// ---------------------------------------------------------------------------
// Printing. Precedence: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom.

int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

void print(const Node& n, const std::string& var, std::string& out);

void print_at_least(const Node& n, int min_prec, const std::string& var, std::string& out) {
    if (precedence(n) < min_prec) {
        out += '(';
        print(n, var, out);
        out += ')';
    } else {
        print(n, var, out);
    }
}

void print(const Node& n, const std::string& var, std::string& out) {
    switch (n.op) {
        case Op::Const: {
            char buf[40];
            if (n.value < 0.0 || std::signbit(n.value)) {
                std::snprintf(buf, sizeof buf, "(-%.17g)", -n.value);
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
            }
            out += buf;
            return;
        }
        case Op::Var: out += var; return;
        case Op::Neg:
            out += '-';
            print_at_least(*n.lhs, 3, var, out);
            return;
        case Op::Add:
        case Op::Sub:
            print_at_least(*n.lhs, 1, var, out);
            out += n.op == Op::Add ? " + " : " - ";
            print_at_least(*n.rhs, 2, var, out);
            return;
        case Op::Mul:
        case Op::Div:
            print_at_least(*n.lhs, 2, var, out);
            out += n.op == Op::Mul ? "*" : "/";
            print_at_least(*n.rhs, 3, var, out);
            return;
        case Op::Pow:
            print_at_least(*n.lhs, 5, var, out);
            out += '^';
            print_at_least(*n.rhs, 3, var, out);
            return;
        default:
            out += op_name(n.op);
            out += '(';
            print(*n.lhs, var, out);
            out += ')';
            return;
    }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser.

class Parser {
public:
    Parser(std::string_view text, std::string_view var) : text_(text), var_(var) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but input ended");
            fail(std::string("expected '") + c + "'");
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make(Op::Add, 0.0, lhs, term());
            } else if (accept('-')) {
                lhs = make(Op::Sub, 0.0, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make(Op::Mul, 0.0, lhs, unary());
            } else if (accept('/')) {
                lhs = make(Op::Div, 0.0, lhs, unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, 0.0, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, 0.0, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return constant(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == var_) return make(Op::Var);
        if (name == "pi") return constant(std::numbers::pi);
        if (name == "e") return constant(std::numbers::e);

        static constexpr std::pair<std::string_view, Op> unary_funcs[] = {
            {"exp", Op::Exp}, {"log", Op::Log}, {"abs", Op::Abs}, {"sqrt", Op::Sqrt},
            {"sin", Op::Sin}, {"cos", Op::Cos}, {"sign", Op::Sign},
        };
        for (const auto& [fname, op] : unary_funcs) {
            if (name == fname) {
                expect('(');
                NodePtr arg = expr();
                expect(')');
                return make(op, 0.0, std::move(arg));
            }
        }
        if (name == "pow") {
            expect('(');
            NodePtr base = expr();
            expect(',');
            NodePtr ex = expr();
            expect(')');
            return make(Op::Pow, 0.0, std::move(base), std::move(ex));
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    std::string_view var_;
    std::size_t pos_ = 0;
};

bool valid_identifier(std::string_view v) {
    if (v.empty() || !(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_')) return false;
    for (char c : v)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    static constexpr std::string_view reserved[] = {"pi", "e", "exp", "log", "abs", "sqrt",
                                                    "sin", "cos", "sign", "pow"};
    for (auto r : reserved)
        if (v == r) return false;
    return true;
}

}  // namespace

FunctionExpr::FunctionExpr(std::shared_ptr<const Node> root, std::string var, std::string source)
    : root_(std::move(root)), var_(std::move(var)), source_(std::move(source)) {}

FunctionExpr FunctionExpr::constant(double value, std::string var) {
    if (!std::isfinite(value)) throw DomainError("constant expression must be finite");
    FunctionExpr e(blowup::constant(value), std::move(var), "");
    e.source_ = e.to_string();
    return e;
}

FunctionExpr FunctionExpr::parse(std::string_view text, std::string_view var) {
    if (!valid_identifier(var)) throw ParseError("invalid variable name '" + std::string(var) + "'", 0);
    Parser p(text, var);
    return FunctionExpr(p.parse(), std::string(var), std::string(text));
}

double FunctionExpr::operator()(double point) const {
    if (std::isnan(point)) throw DomainError("evaluation at NaN");
    return eval_node(*root_, point);
}

FunctionExpr FunctionExpr::derivative() const {
    FunctionExpr d(differentiate(root_), var_, "");
    d.source_ = d.to_string();
    return d;
}

std::string FunctionExpr::to_string() const {
    std::string out;
    print(*root_, var_, out);
    return out;
}

std::optional<double> FunctionExpr::constant_value() const {
    if (depends_on_var(*root_)) return std::nullopt;
    try {
        return eval_node(*root_, 0.0);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

namespace {
void require_same_var(const FunctionExpr& a, const FunctionExpr& b) {
    if (a.var_name() != b.var_name())
        throw std::invalid_argument("cannot combine expressions in '" + a.var_name() + "' and '" +
                                    b.var_name() + "'");
}
}  // namespace

#define BLOWUP_BINARY(OPER, BUILDER)                                           \
    FunctionExpr FunctionExpr::OPER(const FunctionExpr& rhs) const {          \
        require_same_var(*this, rhs);                                          \
        FunctionExpr r(BUILDER(root_, rhs.root_), var_, "");                   \
        r.source_ = r.to_string();                                             \
        return r;                                                              \
    }

BLOWUP_BINARY(operator+, add)
BLOWUP_BINARY(operator-, sub)
BLOWUP_BINARY(operator*, mul)
BLOWUP_BINARY(operator/, div)

#undef BLOWUP_BINARY

}  // namespace blowup
