#pragma once

#include <functional>
#include <string>

#include "rankone/rational.hpp"

namespace rankone {

enum class FieldKind { R, C, H, O };

std::string to_string(FieldKind k);
FieldKind field_kind_from_string(const std::string& s);

// One of the four rank-one hyperbolic model spaces, normalized so that
// -4 <= sec <= -1. Everything downstream depends only on (dim_k, m).
struct RankOneSpace {
    FieldKind kind;
    int n;  // rank parameter; the octonionic plane accepts n = 1 or 2 as label

    static RankOneSpace make(FieldKind kind, int n);

    int dim_k() const;    // 1, 2, 4, 8
    int real_dim() const; // n, 2n, 4n, 16
    int m() const { return real_dim() - 1; }           // geodesic sphere dimension
    int mult_lambda() const { return m() - dim_k() + 1; }   // m(lambda)
    int mult_2lambda() const { return dim_k() - 1; }         // m(2lambda)
    // exponential volume growth rate of balls, m(lambda) + 2 m(2lambda)
    int volume_growth_rate() const { return real_dim() + dim_k() - 2; }

    std::string label() const;
};

// Shape of the geodesic sphere S_r: second fundamental form eigenvalues
// 2coth(2r) (fiber directions) and coth(r), with multiplicities, plus the
// mean curvature. lambda1 >= lambda2 for every r > 0.
struct GeometrySample {
    double r = 0;
    double lambda1 = 0;       // 2 coth(2r)
    double lambda2 = 0;       // coth(r)
    int multiplicity1 = 0;    // dim_k - 1
    int multiplicity2 = 0;    // m - dim_k + 1
    double mean_curvature = 0;
};

GeometrySample sphere_shape(const RankOneSpace& space, double r);

// H/2 - sum of the k largest eigenvalues of the second fundamental form,
// via the closed piecewise formula.
double eigenvalue_gap(const RankOneSpace& space, int k, double r);

// Brute-force evaluation of the same quantity from the eigenvalue list;
// used as the oracle in tests and kept callable from the CLI verify suite.
double eigenvalue_gap_bruteforce(const RankOneSpace& space, int k, double r);

enum class QBoundCase { A, B, Exceptional, ComplexRefined };

std::string to_string(QBoundCase c);

// Classification of the lower bound for the geometric term q(r): the two
// boxed constants, the three exceptional triples, and for the complex
// family the refined radial bound 2(n-k-1)coth(r) + 2tanh(2r).
struct QBoundClassification {
    QBoundCase bound_case;
    Rational constant;           // boxed constant for case A/B; 2(n-k) for refined
    bool has_complex_refined = false;
    // stated refined bound (tanh form) and the stronger form its proof yields
    std::function<double(double)> refined_stated;   // 2(n-k-1)coth(r) + 2tanh(2r)
    std::function<double(double)> refined_proof;    // 2(n-k-1)coth(r) + 2coth(2r)
};

QBoundClassification q_lower_bound(const RankOneSpace& space, int k);

bool is_exceptional_pair(const RankOneSpace& space, int k);

// Volume of the geodesic ball of radius r:
//   A_m * int_0^r sinh(t)^{m(lambda)+m(2lambda)} cosh(t)^{m(2lambda)} dt
// with A_m the area of the unit round m-sphere.
double ball_volume(const RankOneSpace& space, double r);

// Area of the unit round m-sphere, 2 pi^{(m+1)/2} / Gamma((m+1)/2).
double unit_sphere_area(int m);

}  // namespace rankone
