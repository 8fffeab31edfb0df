// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rankone/bounds.hpp"
#include "rankone/cusp_forms.hpp"
#include "rankone/errors.hpp"
#include "rankone/lattice.hpp"
#include "rankone/matrix_coeff.hpp"
#include "rankone/price.hpp"
#include "rankone/quadrature.hpp"
#include "rankone/space.hpp"

#include <random>

using namespace rankone;

namespace {

int failures = 0;

class Criterion {
public:
    Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {
        start_ = std::chrono::steady_clock::now();
    }
    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            notes_ += (notes_.empty() ? "" : "; ") + what;
        }
    }
    void require_runtime(double seconds) {
        budget_ = seconds;
    }
    ~Criterion() {
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (budget_ > 0 && dt > budget_) {
            pass_ = false;
            notes_ += (notes_.empty() ? "" : "; ") + std::string("runtime over budget");
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", pass_ ? "PASS" : "FAIL", id_,
                    title_.c_str(), dt, notes_.empty() ? "" : " -- ", notes_.c_str());
        std::fflush(stdout);
        if (!pass_) ++failures;
    }

private:
    int id_;
    std::string title_;
    std::string notes_;
    bool pass_ = true;
    double budget_ = 0;
    std::chrono::steady_clock::time_point start_;
};

IntegerLattice cubic_lattice(int d) {
    RatMat m(d, RatVec(d, Rational(0)));
    for (int i = 0; i < d; ++i) m[i][i] = Rational(1);
    return IntegerLattice::from_basis(m);
}

void criterion1() {
    Criterion c(1, "exponent table reproduction (exact rational arithmetic)");
    c.require_runtime(1.0);
    c.check(congruence_exponent(CongruenceGroup::SU, 2, 1, Setting::Compact) == Rational(3, 4),
            "SU compact (2,1) != 3/4");
    c.check(congruence_exponent(CongruenceGroup::SU, 2, 1, Setting::Cusped) == Rational(1, 2),
            "SU cusped (2,1) != 1/2");
    for (int n = 3; n <= 10; ++n)
        for (int k = 1; 2 * k < n - 1; ++k) {
            Rational expect = Rational(1) - Rational(4 * (n - 1 - 2 * k), n * (n + 1));
            c.check(congruence_exponent(CongruenceGroup::SO, n, k, Setting::Cusped) == expect,
                    "SO cusped exponent mismatch");
        }
    for (int n = 2; n <= 10; ++n)
        for (int k = 1; k < n; ++k) {
            Rational expect = Rational(1) - Rational(4 * (n - k), (n + 1) * (n + 1) - 1);
            c.check(congruence_exponent(CongruenceGroup::SU, n, k, Setting::Cusped) == expect,
                    "SU cusped exponent mismatch");
            Rational a = congruence_exponent(CongruenceGroup::SU, n, k, Setting::Compact);
            c.check(a == Rational(n * n + 2 * k, n * n + 2 * n) &&
                        a == Rational(1) + Rational(2 * k - 2 * n, n * n + 2 * n),
                    "SU compact printed forms disagree");
        }
#ifdef RANKONE_CLI_PATH
    // the emitted report table carries the same exponents, formula-tagged
    {
        const std::string cli = RANKONE_CLI_PATH;
        const std::string path = "/tmp/rankone_report.csv";
        const int rc =
            std::system((cli + " report --n-max 4 --no-ode --out " + path).c_str());
        std::ifstream in(path);
        std::ostringstream ss;
        ss << in.rdbuf();
        c.check(rc == 0 &&
                    ss.str().find("exponent,SU,2,1,compact,3/4,0.75,congruence.su.compact") !=
                        std::string::npos,
                "report table missing the SU (2,1) compact row");
    }
#endif
}

void criterion2() {
    Criterion c(2, "SO matrix-coefficient lower bounds and identities");
    c.require_runtime(30.0);
    for (int n : {3, 5, 7, 9}) {
        for (int k = 1; 2 * k < n - 1; ++k) {
            auto sys = CoeffSystem::so(n, k);
            auto traj = integrate(sys, 15.0, 1e-10);
            const double cc = so_explicit_constant(n, k);
            double min_fs = 1e300, min_bf = 1e300;
            for (size_t i = 0; i < traj.t.size(); ++i) {
                const auto& s = traj.states[i];
                min_bf = std::min(min_bf, (double)k / n * s.first - s.second);
                if (traj.t[i] >= 1.0)
                    min_fs = std::min(min_fs,
                                      s.first * std::pow(std::sinh(traj.t[i]), k) - cc);
            }
            c.check(min_fs >= 0, "f sinh^k below the explicit constant");
            c.check(min_bf >= -1e-9, "b > (k/n) f");
            c.check(integrating_factor_residual(traj) < 1e-8,
                    "integrating-factor residual too large");
            auto oracle = integrate_fixed_rk4(sys, 15.0, 1e-4);
            for (double t : {1.0, 5.0, 10.0, 15.0}) {
                auto a = traj.at(t), b = oracle.at(t);
                c.check(std::fabs(a.first - b.first) < 1e-7 &&
                            std::fabs(a.second - b.second) < 1e-7,
                        "two-integrator disagreement");
            }
        }
    }
}

void criterion3() {
    Criterion c(3, "critical-degree SO coefficients");
    for (int k : {1, 2, 3}) {
        const int n = 2 * k + 1;
        auto traj = integrate(CoeffSystem::so(n, k), 20.5, 1e-10);
        double min_tf = 1e300;
        for (size_t i = 0; i < traj.t.size(); ++i)
            if (traj.t[i] >= 1.0 && traj.t[i] <= 15.0)
                min_tf = std::min(min_tf, traj.t[i] * traj.states[i].first);
        c.check(min_tf > 0, "t f(t) not positive on [1,15]");
        const auto sp = RankOneSpace::make(FieldKind::R, n);
        const double a = dw_denominator(sp, traj, 10.0) / 10.0;
        const double b = dw_denominator(sp, traj, 20.0) / 20.0;
        const double change = std::fabs(b - a) / std::fabs(b);
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "n=%d k=%d: denominator(R)/R changed %.4f%% between R=10 and 20 "
                      "(tolerance 2%%)",
                      n, k, 100.0 * change);
        c.check(change < 0.02, msg);
    }
}

void criterion4() {
    Criterion c(4, "SU matrix-coefficient bounds");
    c.require_runtime(20.0);
    for (int n : {2, 3, 4, 5}) {
        auto traj = integrate(CoeffSystem::su(n), 15.0, 1e-10);
        double min_nspi = 1e300, min_lower = 1e300, inf_sp = 1e300, sup_sp = 0;
        double prev_g = -1e300;
        bool monotone = true;
        const double lower = su_lower_constant(n);
        for (size_t i = 0; i < traj.t.size(); ++i) {
            const double t = traj.t[i];
            const auto& s = traj.states[i];
            min_nspi = std::min(min_nspi, s.first - n * s.second);
            const double g =
                std::sinh(t) * std::pow(std::tanh(t / 2), 2 * n - 1) * (s.first - n * s.second);
            if (g < prev_g - 1e-11 * std::max(1.0, std::fabs(prev_g))) monotone = false;
            prev_g = g;
            if (t >= 1.0) {
                min_lower = std::min(
                    min_lower, std::sinh(t) * std::tanh(t / 2) * (s.first - s.second) - lower);
                inf_sp = std::min(inf_sp, std::sinh(t) * s.first);
                sup_sp = std::max(sup_sp, std::sinh(t) * s.first);
            }
        }
        c.check(min_nspi >= -1e-9, "phi < n psi somewhere");
        c.check(monotone, "boundary functional not nondecreasing");
        c.check(min_lower >= 0, "explicit SU lower constant violated");
        c.check(inf_sp > 0 && sup_sp < 1e6, "sinh(t) phi(t) not bounded in [c1, c2]");
        std::printf("    (SU n=%d: sinh*phi within [%.6f, %.6f] on [1,15])\n", n, inf_sp,
                    sup_sp);
    }
}

void criterion5() {
    Criterion c(5, "DW growth rate matches the Price-module rates");
    struct Case {
        CoeffSystem sys;
        RankOneSpace space;
        int k;
    };
    std::vector<Case> cases = {{CoeffSystem::so(5, 1), RankOneSpace::make(FieldKind::R, 5), 1},
                               {CoeffSystem::so(7, 1), RankOneSpace::make(FieldKind::R, 7), 1},
                               {CoeffSystem::su(2), RankOneSpace::make(FieldKind::C, 2), 1},
                               {CoeffSystem::su(3), RankOneSpace::make(FieldKind::C, 3), 1}};
    for (const auto& cs : cases) {
        auto traj = integrate(cs.sys, 20.5, 1e-10);
        const double slope = dw_log_slope(cs.space, traj, 10.0, 20.0);
        double predicted;
        if (cs.sys.group == CoeffGroup::SO) {
            predicted = cs.space.n - 1 - 2 * cs.k;
            // the boxed ball coefficient times the volume growth rate
            auto f = ball_decay_factor(cs.space, cs.k);
            c.check(f.rate_exact * Rational(cs.space.volume_growth_rate()) ==
                        Rational(cs.space.n - 1 - 2 * cs.k),
                    "SO ball rate does not rescale to the DW exponent");
        } else {
            predicted = 2.0 * (cs.space.n - cs.k);
            // (C, n=2, k=1) is the exceptional pair: no generic ball rate,
            // so the refined rate 2(n-k) is read off the cusp-setting factor
            if (is_exceptional_pair(cs.space, cs.k)) {
                auto f = cusp_decay_factor(FieldKind::C, cs.space.n, cs.k);
                c.check(f.rate_exact == Rational(2 * (cs.space.n - cs.k)),
                        "refined complex rate mismatch (cusp factor)");
            } else {
                auto f = ball_decay_factor(cs.space, cs.k);
                c.check(f.rate_exact == Rational(2 * (cs.space.n - cs.k)),
                        "SU refined rate mismatch");
            }
        }
        c.check(std::fabs(slope - predicted) / predicted < 0.01,
                "log-slope off by more than 1% (" + cs.sys.label() + ")");
    }
}

void criterion6() {
    Criterion c(6, "lattice transference and point-count bound");
    c.require_runtime(60.0);
    std::mt19937_64 rng(20240607);
    std::uniform_int_distribution<long long> entry(-9, 9);
    auto random_lattice = [&](int d) {
        while (true) {
            RatMat m(d, RatVec(d, Rational(0)));
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m[i][j] = Rational(entry(rng));
            if (rat_mat_det(m) != Rational(0)) return IntegerLattice::from_basis(m);
        }
    };
    int transference_failures = 0;
    for (int t = 0; t < 1000; ++t) {
        auto L = random_lattice(2 + t % 4);
        auto sm = successive_minima(L);
        if (sm.delta_sq * sm.minima_sq.back() < Rational(1)) ++transference_failures;
    }
    c.check(transference_failures == 0, "transference failures present");

    int done = 0, violations = 0;
    while (done < 200) {
        auto L = random_lattice(3);
        auto sm = successive_minima(L);
        std::uniform_real_distribution<double> rad(0.05, 1.0);
        std::uniform_int_distribution<int> nu_pick(0, 2);
        const int nu = nu_pick(rng);
        const double R = rad(rng) * sm.minima.back() * std::exp(-(nu + 1.0)) * 0.99;
        if (!(R > 1e-6)) continue;
        if (!nbound_check(L, nu, R, 4).satisfied) ++violations;
        ++done;
    }
    c.check(violations == 0, "point-count bound violated");
}

void criterion7() {
    Criterion c(7, "cusp forms: zero mode, harmonic modes, balance, primitive");
    // zero mode
    auto m3 = CuspModel::real_cusp(3, cubic_lattice(2));
    auto zm = make_zero_mode(m3, {0.6, -0.3}, {0.8});
    c.check(harmonicity_residual(m3, zm) < 1e-10, "zero-mode residual above 1e-10");
    bool diverges = false;
    try {
        slab_l2_norm(m3, zm, 0.0, kInfHeight);
    } catch (const DivergenceError&) {
        diverges = true;
    }
    c.check(diverges, "nonzero zero mode not detected as non-L2");
    auto zm0 = make_zero_mode(m3, {0.0, 0.0}, {0.0});
    c.check(slab_l2_norm(m3, zm0, 0.0, kInfHeight) == 0.0, "zero form has nonzero norm");

    // harmonic modes
    struct ModeCase {
        int n, k;
    };
    for (ModeCase mc : {ModeCase{5, 1}, ModeCase{7, 1}, ModeCase{7, 2}}) {
        auto model = CuspModel::real_cusp(mc.n, cubic_lattice(mc.n - 1));
        std::vector<long long> e1(mc.n - 1, 0);
        e1[0] = 1;
        HarmonicModeDiagnostics diag;
        auto h = solve_harmonic_mode(model, mc.k, model.dual_vector(e1), &diag);
        const double total = slab_l2_norm(model, h, 0.0, kInfHeight);
        const double cnk =
            (double)(mc.n + 1 - 2 * mc.k) / (double)(mc.n - 1 - 2 * mc.k);
        for (double s : {0.5, 1.0, 2.0}) {
            const double tail = slab_l2_norm(model, h, s, kInfHeight);
            c.check(cnk * std::exp(-(mc.n - 1 - 2 * mc.k) * s) * total - tail >= -1e-8,
                    "cuspidal Price inequality violated");
        }
        for (double u : {0.0, 0.5, 1.0}) {
            auto rep = verify_cusp_balance(model, h, u);
            c.check(rep.residual < 1e-6, "balance identity residual above 1e-6");
            c.check(rep.mu_max < 0.5, "mu reached 1/2");
            c.check(rep.boundary_monotone, "boundary functional not nonincreasing");
        }

        auto b = fourier_primitive(model, h);
        auto diff = add_forms(exterior_derivative(model, b), scale_form(h, -1.0));
        c.check(relative_residual(model, diff, h) < 1e-8, "d b^v != h^v");
    }

    // critical degree on the two-torus
    auto hc = solve_harmonic_mode(m3, 1, m3.dual_vector({1, 0}));
    for (double r0 : {0.0, 1.0, 2.0}) {
        auto rep = verify_cusp_balance(m3, hc, r0);
        c.check(rep.critical_margin.has_value() && *rep.critical_margin >= 0,
                "critical-degree inequality violated at R0=" + std::to_string(r0));
    }
}

void criterion8() {
    Criterion c(8, "peaking sphere averages");
    for (int b : {1, 3, 10, 50}) {
        auto rep = verify_peaking_identity(b, 1000000, 977);
        c.check(rep.pass, "b=" + std::to_string(b) + " outside 3 sigma");
    }
}

void criterion9() {
    Criterion c(9, "bookkeeping formulas");
    c.check(std::fabs(nu_threshold(0) - 3.0 / (M_PI * M_PI)) < 1e-12, "nu_threshold(0)");
    const auto r3 = RankOneSpace::make(FieldKind::R, 3);
    const double expect = 1.0 / (M_PI * (std::sinh(2.0) - 2.0));
    c.check(std::fabs(cusp_count_bound(r3, 2.0, 1.0).ratio - expect) < 1e-10 * expect,
            "cusp count ratio");
    auto m4 = CuspModel::real_cusp(4, cubic_lattice(3));
    CuspForm one;
    one.degree = 0;
    FormMode fm;
    fm.v.assign(3, 0.0);
    fm.tangential.emplace(0u, CoeffFn::exponential(1.0, 0.0));
    one.modes.push_back(fm);
    const double v0 = slab_l2_norm(m4, one, 0.0, kInfHeight);
    for (double k : {0.5, 1.0, 2.0}) {
        const double vk = slab_l2_norm(m4, one, k, kInfHeight);
        c.check(std::fabs(vk - std::exp(-3.0 * k) * v0) < 1e-10 * v0, "cusp volume scaling");
    }
}

void criterion10() {
    Criterion c(10, "determinism of repeated verify runs");
#ifdef RANKONE_CLI_PATH
    const std::string cli = RANKONE_CLI_PATH;
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto twice_identical = [&](const std::string& args, const std::string& what) {
        const std::string a = "/tmp/rankone_det_a.txt", b = "/tmp/rankone_det_b.txt";
        const int ra =
            std::system((cli + " " + args + " --out " + a + " >/dev/null").c_str());
        const int rb =
            std::system((cli + " " + args + " --out " + b + " >/dev/null").c_str());
        c.check(ra == 0 && rb == 0, what + " run failed");
        const std::string ca = slurp(a), cb = slurp(b);
        c.check(!ca.empty() && ca == cb, what + " outputs differ between runs");
    };
    twice_identical("verify --suite all --trials 300 --seed 7", "verify");
    twice_identical("report --n-max 6 --t-end 16", "report");
    twice_identical("ode --group SO --n 5 --k 1 --t-end 6", "ode");
#else
    c.check(false, "CLI path not configured");
#endif
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", failures);
    return 1;
}
