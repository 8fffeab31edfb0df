#pragma once

#include <string>

#include "rankone/rational.hpp"
#include "rankone/space.hpp"

namespace rankone {

enum class DecaySetting { BallGeneric, BallComplex, CuspReal, CuspComplex };

std::string to_string(DecaySetting s);

// Multiplicative L2-mass decay factor. For balls the factor is measured
// from radius 1 (the inequalities integrate from 1 to tau); for cusps from
// height 0. `rate` is the exponent per unit of the radius/height variable.
// For the ball-generic setting the reported rate is the boxed coefficient
// normalized by the volume growth (exponent of V_min per unit inj);
// multiply by volume_growth_rate() to recover the raw exponential rate.
struct DecayFactor {
    DecaySetting setting;
    Rational rate_exact;     // exact value of the rate
    double rate = 0;         // rate_exact as double
    double constant = 1.0;   // explicit prefactor where the source gives one
    bool constant_explicit = false;  // false: existential, reported as 1

    double evaluate(double x) const;  // factor at radius/height x
    double origin() const;            // where decay starts (1 for balls, 0 for cusps)
};

// Ball-setting decay for a harmonic k-form: factor from B_1 to B_tau.
// Kind C uses the refined Kaehler rate 2(n-k); other kinds the boxed
// case A/B coefficients. Exceptional (space, k) pairs are rejected.
DecayFactor ball_decay_factor(const RankOneSpace& space, int k);
double ball_decay(const RankOneSpace& space, int k, double tau);

// Cusp-setting decay across slabs: real rate n-1-2k with constant
// (n+1-2k)/(n-1-2k); complex rate 2(n-k) with constant exactly 1.
DecayFactor cusp_decay_factor(FieldKind kind, int n, int k);

struct CuspDecay {
    double factor;
    double constant;
};
CuspDecay cusp_decay(FieldKind kind, int n, int k, double s);

}  // namespace rankone
