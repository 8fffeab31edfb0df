#include "rankone/bounds.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "rankone/errors.hpp"

namespace rankone {

Rational BoundReport::exponent_of(const std::string& input) const {
    for (const auto& e : exponents)
        if (e.input == input) return e.exponent;
    return Rational(0);
}

std::string BoundReport::to_json() const {
    nlohmann::json j;
    j["formulaId"] = formula_id;
    nlohmann::json je = nlohmann::json::object();
    for (const auto& e : exponents) je[e.input] = e.exponent.str();
    j["exponents"] = je;
    j["constantPolicy"] = policy == ConstantPolicy::Explicit ? "explicit" : "existential";
    j["constant"] = constant;
    j["injScalesVmin"] = inj_scales_vmin;
    j["value"] = value;
    return j.dump();
}

BoundReport compact_bound(const BoundInputs& in) {
    const RankOneSpace& sp = in.space;
    const int k = in.k;
    if (!(in.inj_thick >= 1)) throw DomainError("compact bound needs inj >= 1");
    if (!(in.vol > 0) || !(in.v_min > 0)) throw DomainError("volumes must be positive");
    if (is_exceptional_pair(sp, k))
        throw UnsupportedError("no bound for the exceptional pair (" + sp.label() + ", k=" +
                               std::to_string(k) + ")");

    BoundReport rep;
    rep.policy = ConstantPolicy::Existential;
    rep.constant = 1.0;
    rep.exponents.push_back({"vol", Rational(1)});

    if (sp.kind == FieldKind::R) {
        const int n = sp.n;
        if (2 * k < n - 1) {
            rep.formula_id = "betti.compact.real";
            Rational e(2 * k + 1 - n, n - 1);
            rep.exponents.push_back({"vMin", e});
            rep.value = in.vol * std::pow(in.v_min, e.to_double());
        } else if (2 * k == n - 1) {
            rep.formula_id = "betti.compact.real.critical";
            rep.exponents.push_back({"inj", Rational(-1)});
            rep.value = in.vol / in.inj_thick;
        } else {
            throw DomainError("real compact bound needs k <= (n-1)/2");
        }
        return rep;
    }
    if (sp.kind == FieldKind::C) {
        if (!(k < sp.n)) throw DomainError("complex compact bound needs k < n");
        rep.formula_id = "betti.compact.complex";
        Rational e(k - sp.n, sp.n);
        rep.exponents.push_back({"vMin", e});
        rep.value = in.vol * std::pow(in.v_min, e.to_double());
        return rep;
    }
    // quaternionic / octonionic: boxed case A/B exponents, scaled by inj
    QBoundClassification q = q_lower_bound(sp, k);
    const int d = sp.real_dim(), dk = sp.dim_k();
    Rational e = (q.bound_case == QBoundCase::A)
                     ? Rational(-(d - dk - 2 * k), d + dk - 2)
                     : Rational(-(d + dk - 4 * k), d + dk - 2);
    rep.formula_id = q.bound_case == QBoundCase::A ? "betti.compact.rankone.caseA"
                                                   : "betti.compact.rankone.caseB";
    rep.exponents.push_back({"vMin", e});
    rep.inj_scales_vmin = true;
    rep.value = in.vol * std::pow(in.v_min, e.to_double() * in.inj_thick);
    return rep;
}

Rational congruence_exponent(CongruenceGroup group, int n, int k, Setting setting) {
    if (n < 2) throw DomainError("n must be >= 2");
    if (group == CongruenceGroup::SU) {
        if (!(k >= 1 && k < n)) throw DomainError("SU exponent needs 1 <= k < n");
        if (setting == Setting::Compact)
            return Rational(n * n + 2 * k, n * n + 2 * n);
        return Rational(1) - Rational(4 * (n - k), (n + 1) * (n + 1) - 1);
    }
    if (!(k >= 1 && 2 * k < n - 1))
        throw DomainError("SO exponent needs 1 <= k < (n-1)/2");
    return Rational(1) - Rational(4 * (n - 1 - 2 * k), n * (n + 1));
}

BoundReport cusped_l2_bound(const BoundInputs& in) {
    const RankOneSpace& sp = in.space;
    const int k = in.k;
    if (!(in.inj_thick >= 1)) throw DomainError("cusped bound needs inj_{M0} >= 1");
    if (sp.kind != FieldKind::R && sp.kind != FieldKind::C)
        throw DomainError("cusped bounds cover the real and complex families");

    const double v_min_cusp = in.v_min_cusp > 0 ? in.v_min_cusp : in.v_min;
    double cusp_vol = 0;
    for (double c : in.cusp_vols) cusp_vol += c;

    BoundReport rep;
    rep.policy = ConstantPolicy::Existential;
    rep.constant = 1.0;
    rep.exponents.push_back({"vol", Rational(1)});

    if (sp.kind == FieldKind::C) {
        if (!(k >= 1 && k < sp.n)) throw DomainError("complex cusped bound needs 1 <= k < n");
        Rational e(k - sp.n, sp.n);
        rep.formula_id = "l2.cusped.complex";
        rep.exponents.push_back({"vMin", e});
        rep.exponents.push_back({"cuspVol", Rational(1)});
        rep.value = in.vol * std::pow(in.v_min, e.to_double()) +
                    cusp_vol * std::pow(v_min_cusp, e.to_double());
        return rep;
    }
    const int n = sp.n;
    if (2 * k < n - 1) {
        Rational e(2 * k + 1 - n, n - 1);
        rep.formula_id = "l2.cusped.real";
        rep.exponents.push_back({"vMin", e});
        rep.exponents.push_back({"cuspVol", Rational(1)});
        rep.value = in.vol * std::pow(in.v_min, e.to_double()) +
                    cusp_vol * std::pow(v_min_cusp, e.to_double());
        return rep;
    }
    if (2 * k == n - 1) {
        rep.formula_id = "l2.cusped.real.critical";
        rep.exponents.push_back({"inj", Rational(-1)});
        rep.value = in.vol / in.inj_thick;
        return rep;
    }
    throw DomainError("real cusped bound needs k <= (n-1)/2");
}

double peaking_threshold(int n, int k) {
    if (!(k >= 0 && 2 * k < n - 1)) throw DomainError("peaking threshold needs k < (n-1)/2");
    const double a = n - 1 - 2 * k;
    return std::log(2.0 * (n + 1 - 2 * k) / a) / a;
}

double nu_threshold(int nu) {
    if (nu < 0) throw DomainError("nu must be nonnegative");
    // partial sum smallest terms first (exact rationals overflow past
    // nu ~ 25; ascending long-double summation keeps full precision)
    long double sum = 0;
    for (int j = nu + 1; j >= 1; --j) sum += 1.0L / ((long double)j * j);
    return (double)(sum * 3.0L / (M_PI * M_PI));
}

std::vector<bool> nu_index_set(int nu, const std::vector<double>& deltas) {
    if (nu < 0) throw DomainError("nu must be nonnegative");
    const double rhs = 1.0 / (4.0 * (nu + 1.0) * (nu + 1.0));
    std::vector<bool> member;
    member.reserve(deltas.size());
    for (double d : deltas) {
        if (!(d > 0))
            member.push_back(false);
        else
            member.push_back(std::exp(2.0 - nu) / (2.0 * M_PI * d) < rhs);
    }
    return member;
}

double critical_cusp_bound(int nu, double vol_slab, double lambda1, int n,
                           bool hypothesis_verified) {
    if (!hypothesis_verified)
        throw DomainError("the e^{nu+1} R < lambda_{n-1} hypothesis must be verified first "
                          "(use nbound_check)");
    if (nu < 0 || !(vol_slab > 0) || !(lambda1 > 0) || n < 3)
        throw DomainError("bad critical cusp bound inputs");
    const double q = (nu + 1.0) * (nu + 1.0);
    return std::exp((double)-nu) * vol_slab * std::pow(1.0 + 40.0 * q, n + 1) *
           std::pow(1.0 / (lambda1 * 20.0 * q) + std::exp((double)-nu) / 2.0, n - 2);
}

double critical_cusp_bound_henmay(int nu, double vol_slab, double inj, int n) {
    if (nu < 0 || !(vol_slab > 0) || !(inj > 0) || n < 3)
        throw DomainError("bad critical cusp bound inputs");
    return (nu + 1.0) * (nu + 1.0) * std::exp(-(double)(n - 2) * nu) * vol_slab / inj;
}

CuspCountBound cusp_count_bound(const RankOneSpace& space, double inj_thick, double vol) {
    if (!(inj_thick > 0)) throw DomainError("inj must be positive");
    CuspCountBound out;
    out.ratio = 1.0 / ball_volume(space, inj_thick / 2.0);
    out.max_cusps = vol * out.ratio;
    return out;
}

DeRhamCriticalBound derham_critical_bound(const RankOneSpace& space, double inj_thick, double vol,
                                          double l_n_policy) {
    if (space.kind != FieldKind::R || space.n % 2 == 0)
        throw DomainError("the de Rham critical bound applies to odd-dimensional real quotients");
    DeRhamCriticalBound out;
    out.ratio = cusp_count_bound(space, inj_thick, vol).ratio;
    out.cusp_term = l_n_policy * out.ratio;
    out.l2_term = 1.0 / inj_thick;
    out.value = vol * (out.cusp_term + out.l2_term);
    out.cusp_term_dominates = out.cusp_term > out.l2_term;
    return out;
}

PeakingReport verify_peaking_identity(int b, long long trials, uint64_t seed) {
    if (b < 1) throw DomainError("sphere dimension parameter b must be >= 1");
    PeakingReport rep;
    rep.exact = 1.0 / b;
    rep.trials = trials;
    if (b == 1) {
        // S^0 = {-1, +1}: h_1^2 is identically 1
        rep.mean = 1.0;
        rep.std_error = 0.0;
        rep.pass = true;
        return rep;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sum = 0, sum_sq = 0;
    std::vector<double> x(b);
    for (long long t = 0; t < trials; ++t) {
        double norm_sq = 0;
        for (int i = 0; i < b; ++i) {
            x[i] = gauss(rng);
            norm_sq += x[i] * x[i];
        }
        const double h1_sq = x[0] * x[0] / norm_sq;
        sum += h1_sq;
        sum_sq += h1_sq * h1_sq;
    }
    rep.mean = sum / trials;
    const double var = (sum_sq / trials - rep.mean * rep.mean) / (trials - 1.0);
    rep.std_error = std::sqrt(std::max(var, 0.0));
    rep.pass = std::fabs(rep.mean - rep.exact) <= 3.0 * rep.std_error;
    return rep;
}

}  // namespace rankone
