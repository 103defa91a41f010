#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace blowup {

/// A real number extended with +inf and -inf.
///
/// Ordering is total (NaN is never representable). Arithmetic follows the
/// measure-theoretic conventions: 0 * inf = 0, x / inf = 0 for finite x.
/// Indeterminate forms (inf - inf, inf / inf, division by zero) throw DomainError.
class ExtReal {
public:
    enum class Kind { NegInf, Finite, PosInf };

    constexpr ExtReal() = default;
    ExtReal(double v);  // NOLINT(google-explicit-constructor): doubles promote naturally

    static constexpr ExtReal pos_inf() { return ExtReal(Kind::PosInf); }
    static constexpr ExtReal neg_inf() { return ExtReal(Kind::NegInf); }

    /// Accepts "inf", "+inf", "-inf", "infinity" (any case) and decimal numbers.
    static ExtReal parse(std::string_view text);

    constexpr Kind kind() const noexcept { return kind_; }
    constexpr bool is_finite() const noexcept { return kind_ == Kind::Finite; }
    constexpr bool is_pos_inf() const noexcept { return kind_ == Kind::PosInf; }
    constexpr bool is_neg_inf() const noexcept { return kind_ == Kind::NegInf; }

    /// Finite value; throws DomainError when infinite.
    double value() const;
    /// IEEE view: +-infinity for the infinite kinds.
    double to_double() const noexcept;

    std::string to_string() const;

    friend std::weak_ordering operator<=>(const ExtReal& a, const ExtReal& b) noexcept;
    friend bool operator==(const ExtReal& a, const ExtReal& b) noexcept;

    friend ExtReal operator-(const ExtReal& a);
    friend ExtReal operator+(const ExtReal& a, const ExtReal& b);
    friend ExtReal operator-(const ExtReal& a, const ExtReal& b);
    friend ExtReal operator*(const ExtReal& a, const ExtReal& b);
    friend ExtReal operator/(const ExtReal& a, const ExtReal& b);

private:
    constexpr explicit ExtReal(Kind k) : kind_(k) {}

    Kind kind_ = Kind::Finite;
    double value_ = 0.0;
};

ExtReal min(const ExtReal& a, const ExtReal& b);
ExtReal max(const ExtReal& a, const ExtReal& b);

}  // namespace blowup
