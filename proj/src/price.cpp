#include "rankone/price.hpp"

#include <cmath>

#include "rankone/errors.hpp"

namespace rankone {

std::string to_string(DecaySetting s) {
    switch (s) {
        case DecaySetting::BallGeneric: return "ball-generic";
        case DecaySetting::BallComplex: return "ball-complex";
        case DecaySetting::CuspReal: return "cusp-real";
        case DecaySetting::CuspComplex: return "cusp-complex";
    }
    return "?";
}

double DecayFactor::origin() const {
    return (setting == DecaySetting::BallGeneric || setting == DecaySetting::BallComplex) ? 1.0
                                                                                          : 0.0;
}

double DecayFactor::evaluate(double x) const {
    if (x < origin()) throw DomainError("decay factor evaluated before its origin");
    return constant * std::exp(-rate * (x - origin()));
}

DecayFactor ball_decay_factor(const RankOneSpace& space, int k) {
    if (is_exceptional_pair(space, k))
        throw UnsupportedError("no ball decay rate for the exceptional pair (" + space.label() +
                               ", k=" + std::to_string(k) + ")");
    QBoundClassification q = q_lower_bound(space, k);

    DecayFactor f;
    f.constant = 1.0;
    f.constant_explicit = false;
    if (space.kind == FieldKind::C) {
        f.setting = DecaySetting::BallComplex;
        f.rate_exact = Rational(2 * (space.n - k));
    } else {
        const int d = space.real_dim();
        const int dk = space.dim_k();
        f.setting = DecaySetting::BallGeneric;
        if (q.bound_case == QBoundCase::A)
            f.rate_exact = Rational(d - dk - 2 * k, d + dk - 2);
        else
            f.rate_exact = Rational(d + dk - 4 * k, d + dk - 2);
    }
    f.rate = f.rate_exact.to_double();
    if (!(f.rate > 0))
        throw UnsupportedError("nonpositive decay rate for (" + space.label() + ", k=" +
                               std::to_string(k) + ")");
    return f;
}

double ball_decay(const RankOneSpace& space, int k, double tau) {
    if (tau < 1.0) throw DomainError("ball decay requires tau >= 1");
    return ball_decay_factor(space, k).evaluate(tau);
}

DecayFactor cusp_decay_factor(FieldKind kind, int n, int k) {
    DecayFactor f;
    if (kind == FieldKind::R) {
        if (!(2 * k < n - 1))
            throw DomainError("real cusp decay needs k < (n-1)/2; critical degree is handled by "
                              "the bound calculators");
        f.setting = DecaySetting::CuspReal;
        f.rate_exact = Rational(n - 1 - 2 * k);
        f.constant = Rational(n + 1 - 2 * k, n - 1 - 2 * k).to_double();
        f.constant_explicit = true;
    } else if (kind == FieldKind::C) {
        if (!(k < n)) throw DomainError("complex cusp decay needs k < n");
        f.setting = DecaySetting::CuspComplex;
        f.rate_exact = Rational(2 * (n - k));
        f.constant = 1.0;
        f.constant_explicit = true;
    } else {
        throw DomainError("cusp decay is defined for the real and complex families only");
    }
    f.rate = f.rate_exact.to_double();
    return f;
}

CuspDecay cusp_decay(FieldKind kind, int n, int k, double s) {
    if (s < 0) throw DomainError("cusp height must be nonnegative");
    DecayFactor f = cusp_decay_factor(kind, n, k);
    return CuspDecay{f.evaluate(s), f.constant};
}

}  // namespace rankone
