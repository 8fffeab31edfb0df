#include "rankone/space.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rankone/errors.hpp"
#include "rankone/quadrature.hpp"

namespace rankone {

std::string to_string(FieldKind k) {
    switch (k) {
        case FieldKind::R: return "R";
        case FieldKind::C: return "C";
        case FieldKind::H: return "H";
        case FieldKind::O: return "O";
    }
    return "?";
}

FieldKind field_kind_from_string(const std::string& s) {
    if (s == "R") return FieldKind::R;
    if (s == "C") return FieldKind::C;
    if (s == "H") return FieldKind::H;
    if (s == "O") return FieldKind::O;
    throw DomainError("unknown field kind: " + s + " (expected R, C, H, or O)");
}

RankOneSpace RankOneSpace::make(FieldKind kind, int n) {
    if (n < 1) throw DomainError("rank parameter n must be positive");
    if (kind == FieldKind::R && n < 2) throw DomainError("real-hyperbolic space needs n >= 2");
    if (kind == FieldKind::O && n != 1 && n != 2)
        throw DomainError("octonionic space exists only as the plane (n = 1 or 2 as label)");
    return RankOneSpace{kind, n};
}

int RankOneSpace::dim_k() const {
    switch (kind) {
        case FieldKind::R: return 1;
        case FieldKind::C: return 2;
        case FieldKind::H: return 4;
        case FieldKind::O: return 8;
    }
    return 0;
}

int RankOneSpace::real_dim() const {
    switch (kind) {
        case FieldKind::R: return n;
        case FieldKind::C: return 2 * n;
        case FieldKind::H: return 4 * n;
        case FieldKind::O: return 16;
    }
    return 0;
}

std::string RankOneSpace::label() const { return to_string(kind) + "^" + std::to_string(n); }

GeometrySample sphere_shape(const RankOneSpace& space, double r) {
    if (!(r > 0)) throw DomainError("sphere radius must be positive");
    GeometrySample s;
    s.r = r;
    s.lambda1 = 2.0 / std::tanh(2.0 * r);
    s.lambda2 = 1.0 / std::tanh(r);
    s.multiplicity1 = space.mult_2lambda();
    s.multiplicity2 = space.mult_lambda();
    s.mean_curvature = s.multiplicity1 * s.lambda1 + s.multiplicity2 * s.lambda2;
    return s;
}

double eigenvalue_gap(const RankOneSpace& space, int k, double r) {
    if (k < 1 || k >= space.real_dim()) throw DomainError("degree k out of range");
    if (!(r > 0)) throw DomainError("radius must be positive");
    const double coth = 1.0 / std::tanh(r);
    const double tanh = std::tanh(r);
    const double mh = 0.5 * space.m();
    const int dk = space.dim_k();
    if (k <= dk - 1) return (mh - k) * coth + (0.5 * (dk - 1) - k) * tanh;
    return (mh - k) * coth - 0.5 * (dk - 1) * tanh;
}

double eigenvalue_gap_bruteforce(const RankOneSpace& space, int k, double r) {
    if (k < 1 || k >= space.real_dim()) throw DomainError("degree k out of range");
    GeometrySample s = sphere_shape(space, r);
    std::vector<double> eig;
    eig.insert(eig.end(), s.multiplicity1, s.lambda1);
    eig.insert(eig.end(), s.multiplicity2, s.lambda2);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    double sum = 0;
    for (int i = 0; i < k; ++i) sum += eig[i];
    return 0.5 * s.mean_curvature - sum;
}

std::string to_string(QBoundCase c) {
    switch (c) {
        case QBoundCase::A: return "A";
        case QBoundCase::B: return "B";
        case QBoundCase::Exceptional: return "exceptional";
        case QBoundCase::ComplexRefined: return "complex-refined";
    }
    return "?";
}

bool is_exceptional_pair(const RankOneSpace& space, int k) {
    switch (space.kind) {
        case FieldKind::C: return space.n == 2 && k == 1;
        case FieldKind::H: return space.n == 2 && k == 3;
        case FieldKind::O: return k == 6 || k == 7;
        case FieldKind::R: return false;
    }
    return false;
}

QBoundClassification q_lower_bound(const RankOneSpace& space, int k) {
    if (k < 1 || k >= space.real_dim()) throw DomainError("degree k out of range");
    const int d = space.real_dim();
    const int dk = space.dim_k();

    QBoundClassification out;
    out.constant = Rational(0);

    if (space.kind == FieldKind::C && k < space.n) {
        const int n = space.n;
        out.has_complex_refined = true;
        out.refined_stated = [n, k](double r) {
            return 2.0 * (n - k - 1) / std::tanh(r) + 2.0 * std::tanh(2.0 * r);
        };
        out.refined_proof = [n, k](double r) {
            return 2.0 * (n - k - 1) / std::tanh(r) + 2.0 / std::tanh(2.0 * r);
        };
    }

    if (is_exceptional_pair(space, k)) {
        out.bound_case = QBoundCase::Exceptional;
        if (out.has_complex_refined) out.constant = Rational(2 * (space.n - k));
        return out;
    }
    if (k > dk - 1 && 2 * k < d - dk) {
        out.bound_case = QBoundCase::A;
        out.constant = Rational(d - dk, 2) - Rational(k);
        return out;
    }
    if (k <= dk - 1) {
        out.bound_case = QBoundCase::B;
        out.constant = Rational(d + dk - 2, 2) - Rational(2 * k);
        return out;
    }
    if (out.has_complex_refined) {
        out.bound_case = QBoundCase::ComplexRefined;
        out.constant = Rational(2 * (space.n - k));
        return out;
    }
    throw DomainError("no positivity bound available for " + space.label() + ", k=" +
                      std::to_string(k));
}

double unit_sphere_area(int m) {
    if (m < 0) throw DomainError("sphere dimension must be nonnegative");
    // A_m = 2 pi^{(m+1)/2} / Gamma((m+1)/2)
    const double half = 0.5 * (m + 1);
    return 2.0 * std::pow(M_PI, half) / std::tgamma(half);
}

double ball_volume(const RankOneSpace& space, double r) {
    if (r < 0) throw DomainError("ball radius must be nonnegative");
    if (r == 0) return 0.0;
    const int a = space.mult_lambda() + space.mult_2lambda();
    const int b = space.mult_2lambda();
    const double area = unit_sphere_area(space.m());
    auto integrand = [a, b](double t) {
        return std::pow(std::sinh(t), a) * std::pow(std::cosh(t), b);
    };
    return area * integrate(integrand, 0.0, r, 1e-12, 1e-14);
}

}  // namespace rankone
