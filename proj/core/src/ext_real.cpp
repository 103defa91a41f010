#include "blowup/ext_real.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "blowup/errors.hpp"

namespace blowup {

ExtReal::ExtReal(double v) {
    if (std::isnan(v)) throw DomainError("ExtReal cannot hold NaN");
    if (std::isinf(v)) {
        kind_ = v > 0 ? Kind::PosInf : Kind::NegInf;
    } else {
        value_ = v;
    }
}

ExtReal ExtReal::parse(std::string_view text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(c)));
    }
    if (s == "inf" || s == "+inf" || s == "infinity" || s == "+infinity") return pos_inf();
    if (s == "-inf" || s == "-infinity") return neg_inf();
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw DomainError("not an extended real: '" + std::string(text) + "'");
    return ExtReal(v);
}

double ExtReal::value() const {
    if (!is_finite()) throw DomainError("infinite ExtReal has no finite value");
    return value_;
}

double ExtReal::to_double() const noexcept {
    switch (kind_) {
        case Kind::NegInf: return -HUGE_VAL;
        case Kind::PosInf: return HUGE_VAL;
        case Kind::Finite: break;
    }
    return value_;
}

std::string ExtReal::to_string() const {
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
}

std::weak_ordering operator<=>(const ExtReal& a, const ExtReal& b) noexcept {
    const double x = a.to_double();
    const double y = b.to_double();
    if (x < y) return std::weak_ordering::less;
    if (x > y) return std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
}

bool operator==(const ExtReal& a, const ExtReal& b) noexcept { return a.to_double() == b.to_double(); }

ExtReal operator-(const ExtReal& a) { return ExtReal(-a.to_double()); }

ExtReal operator+(const ExtReal& a, const ExtReal& b) {
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
        throw DomainError("indeterminate form inf - inf");
    return ExtReal(a.to_double() + b.to_double());
}

ExtReal operator-(const ExtReal& a, const ExtReal& b) { return a + (-b); }

ExtReal operator*(const ExtReal& a, const ExtReal& b) {
    // 0 * inf = 0
    if ((a.is_finite() && a.value_ == 0.0) || (b.is_finite() && b.value_ == 0.0)) return ExtReal(0.0);
    return ExtReal(a.to_double() * b.to_double());
}

ExtReal operator/(const ExtReal& a, const ExtReal& b) {
    if (!a.is_finite() && !b.is_finite()) throw DomainError("indeterminate form inf / inf");
    if (b.is_finite() && b.value_ == 0.0) throw DomainError("division by zero");
    if (!b.is_finite()) return ExtReal(0.0);
    return ExtReal(a.to_double() / b.value_);
}

ExtReal min(const ExtReal& a, const ExtReal& b) { return b < a ? b : a; }
ExtReal max(const ExtReal& a, const ExtReal& b) { return a < b ? b : a; }

}  // namespace blowup
