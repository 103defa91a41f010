#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace blowup {

/// A parsed scalar function of one free variable.
///
/// Grammar (LL, standard precedence):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?          right-associative
///     primary := number | var | 'pi' | 'e' | func '(' expr (',' expr)? ')' | '(' expr ')'
///     func    := exp | log | abs | sqrt | sin | cos | sign | pow
///
/// Values are immutable and cheap to copy (the tree is shared), so one
/// expression may be evaluated from any number of threads.
class FunctionExpr {
public:
    struct Node;

    /// The constant function `value` in variable `var`.
    static FunctionExpr constant(double value, std::string var = "x");

    /// Throws ParseError on malformed text or unknown identifiers.
    static FunctionExpr parse(std::string_view text, std::string_view var = "x");

    /// Evaluates at `point`.
    ///
    /// Domain violations (log of a non-positive number, a pole, sqrt of a
    /// negative number, non-integer power of a negative base, indeterminate
    /// forms) throw DomainError; NaN never escapes. Overflow is reported as a
    /// signed infinity.
    double operator()(double point) const;
    double eval(double point) const { return (*this)(point); }

    /// Symbolic derivative with respect to the free variable. abs differentiates
    /// to sign, with sign(0) = 0; other non-differentiable points surface as
    /// DomainError when the derivative is evaluated there.
    FunctionExpr derivative() const;

    /// Text that parses back to an evaluation-identical expression.
    std::string to_string() const;

    const std::string& var_name() const noexcept { return var_; }
    const std::string& source_text() const noexcept { return source_; }

    /// The value when the expression does not depend on its variable.
    std::optional<double> constant_value() const;

    // Builders used by derivative(); also handy for composing expressions in code.
    FunctionExpr operator+(const FunctionExpr& rhs) const;
    FunctionExpr operator-(const FunctionExpr& rhs) const;
    FunctionExpr operator*(const FunctionExpr& rhs) const;
    FunctionExpr operator/(const FunctionExpr& rhs) const;

private:
    FunctionExpr(std::shared_ptr<const Node> root, std::string var, std::string source);

    std::shared_ptr<const Node> root_;
    std::string var_;
    std::string source_;
};

/// Spelled-out operations matching the command-line vocabulary.
inline FunctionExpr parse_expr(std::string_view text, std::string_view var) { return FunctionExpr::parse(text, var); }
inline double eval_expr(const FunctionExpr& e, double point) { return e(point); }
inline FunctionExpr diff_expr(const FunctionExpr& e) { return e.derivative(); }

}  // namespace blowup
