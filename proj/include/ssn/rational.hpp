#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ssn {

/// Exact rational on int64, always normalized (gcd 1, positive denominator).
/// Certificates and oracle probabilities are small fractions; intermediate
/// products are taken in 128-bit and checked on the way back to 64.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }
    explicit Rational(std::int64_t n) : num(n), den(1) {}

    void normalize() {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    static std::int64_t checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw std::overflow_error("Rational: 64-bit overflow");
        return static_cast<std::int64_t>(v);
    }

    static Rational from128(__int128 n, __int128 d) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        return Rational(checked(n), checked(d));
    }

    Rational operator+(const Rational& o) const {
        return from128((__int128)num * o.den + (__int128)o.num * den,
                       (__int128)den * o.den);
    }
    Rational operator-(const Rational& o) const {
        return from128((__int128)num * o.den - (__int128)o.num * den,
                       (__int128)den * o.den);
    }
    Rational operator*(const Rational& o) const {
        return from128((__int128)num * o.num, (__int128)den * o.den);
    }
    Rational operator/(const Rational& o) const {
        if (o.num == 0) throw std::invalid_argument("Rational: division by zero");
        return from128((__int128)num * o.den, (__int128)den * o.num);
    }
    Rational operator-() const { Rational r; r.num = -num; r.den = den; return r; }

    Rational abs() const { Rational r = *this; if (r.num < 0) r.num = -r.num; return r; }

    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        return (__int128)num * o.den < (__int128)o.num * den;
    }
    bool operator<=(const Rational& o) const { return !(o < *this); }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return !(*this < o); }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    /// "num/den" (den omitted when 1).
    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

    /// Fixed-point decimal with `digits` places, rounded half away from zero.
    /// Presentation only; the exact value travels as num/den.
    std::string decimal(int digits = 6) const {
        __int128 scale = 1;
        for (int i = 0; i < digits; ++i) scale *= 10;
        __int128 n = (__int128)(num < 0 ? -num : num) * scale;
        __int128 scaled = (n + den / 2) / den;
        std::string whole = std::to_string((long long)(scaled / scale));
        std::string frac = std::to_string((long long)(scaled % scale));
        frac.insert(frac.begin(), digits - frac.size(), '0');
        std::string out = (num < 0 && scaled != 0) ? "-" : "";
        out += whole;
        if (digits > 0) out += "." + frac;
        return out;
    }
};

} // namespace ssn
