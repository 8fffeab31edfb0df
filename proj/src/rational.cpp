#include "rankone/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>

namespace rankone {

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational Rational::parse(const std::string& s) {
    if (s.empty()) throw DomainError("empty rational literal");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        char* end = nullptr;
        long long n = std::strtoll(s.c_str(), &end, 10);
        if (end != s.c_str() + slash) throw DomainError("bad rational literal: " + s);
        long long d = std::strtoll(s.c_str() + slash + 1, &end, 10);
        if (*end != '\0') throw DomainError("bad rational literal: " + s);
        return Rational(n, d);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        // decimal: scale by a power of ten
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        char* end = nullptr;
        long long n = std::strtoll(digits.c_str(), &end, 10);
        if (*end != '\0') throw DomainError("bad rational literal: " + s);
        long long d = 1;
        for (size_t i = dot + 1; i < s.size(); ++i) {
            if (d > INT64_MAX / 10) throw NumericError("rational overflow in parse");
            d *= 10;
        }
        return Rational(n, d);
    }
    char* end = nullptr;
    long long n = std::strtoll(s.c_str(), &end, 10);
    if (*end != '\0') throw DomainError("bad rational literal: " + s);
    return Rational(n);
}

Rational Rational::from_double_exact(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite value");
    int exp = 0;
    double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
    // 53 mantissa bits
    long long mant = (long long)std::ldexp(m, 53);
    exp -= 53;
    // exact whenever the denominator fits in int64; otherwise round the
    // mantissa to the nearest 2^62-denominator rational
    while (exp < -62) {
        mant = (mant >= 0 ? mant + 1 : mant - 1) / 2;
        ++exp;
    }
    Rational r(mant);
    while (exp > 0) { r *= Rational(2); --exp; }
    while (exp < 0) { r /= Rational(2); ++exp; }
    return r;
}

}  // namespace rankone
