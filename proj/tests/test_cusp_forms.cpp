#include <cmath>
#include <random>

#include "doctest.h"
#include "rankone/cusp_forms.hpp"
#include "rankone/errors.hpp"

using namespace rankone;

namespace {

IntegerLattice cubic(int d) {
    RatMat m(d, RatVec(d, Rational(0)));
    for (int i = 0; i < d; ++i) m[i][i] = Rational(1);
    return IntegerLattice::from_basis(m);
}

CuspModel real_model(int n) { return CuspModel::real_cusp(n, cubic(n - 1)); }

std::vector<uint32_t> all_masks(int dims, int k) {
    std::vector<uint32_t> out;
    for (uint32_t m = 0; m < (1u << dims); ++m)
        if ((int)__builtin_popcount(m) == k) out.push_back(m);
    return out;
}

// random mode forms; rates decay fast enough that sup-norm comparisons
// against weighted frames stay anchored near s = 0
CuspForm random_form(const CuspModel& model, int degree, std::mt19937_64& rng,
                     double rate_lo = -3.0, double rate_hi = -1.0) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> rate(rate_lo, rate_hi);
    std::uniform_int_distribution<int> mode_coord(-2, 2);
    CuspForm f;
    f.degree = degree;
    FormMode m;
    m.v.resize(model.cross_dim());
    for (auto& x : m.v) x = (double)mode_coord(rng);
    for (uint32_t I : all_masks(model.cross_dim(), degree))
        if (amp(rng) > 0)
            m.tangential.emplace(I, CoeffFn::exponential({amp(rng), amp(rng)}, rate(rng)));
    for (uint32_t J : all_masks(model.cross_dim(), degree - 1))
        if (amp(rng) > 0)
            m.ds_part.emplace(J, CoeffFn::exponential({amp(rng), amp(rng)}, rate(rng)));
    f.modes.push_back(std::move(m));
    return f;
}

CuspForm radial_function(const CuspModel& model, double rate) {
    CuspForm f;
    f.degree = 0;
    FormMode m;
    m.v.assign(model.cross_dim(), 0.0);
    m.tangential.emplace(0u, CoeffFn::exponential(1.0, rate));
    f.modes.push_back(std::move(m));
    return f;
}

}  // namespace

TEST_CASE("star squares to the sign of the degree pairing") {
    // all tangential and ds basis forms, on a real and on a weighted
    // (complex) cross section
    auto models = {real_model(5), CuspModel::complex_cusp(2, cubic(2), 1.0)};
    for (const auto& model : models) {
        const int N = model.total_dim();
        for (int k = 0; k <= N; ++k) {
            const double sign = (k * (N - k)) % 2 == 0 ? 1.0 : -1.0;
            for (uint32_t I : all_masks(model.cross_dim(), k)) {
                CuspForm f;
                f.degree = k;
                FormMode m;
                m.v.assign(model.cross_dim(), 0.0);
                m.tangential.emplace(I, CoeffFn::exponential(1.0, 0.0));
                f.modes.push_back(m);
                CuspForm ss = hodge_star(model, hodge_star(model, f));
                const auto& c = ss.modes.front().tangential.at(I);
                for (double s : {0.0, 0.8, 2.0})
                    CHECK(c.eval(s).real() == doctest::Approx(sign).epsilon(1e-12));
            }
            for (uint32_t J : all_masks(model.cross_dim(), k - 1)) {
                CuspForm f;
                f.degree = k;
                FormMode m;
                m.v.assign(model.cross_dim(), 0.0);
                m.ds_part.emplace(J, CoeffFn::exponential(1.0, 0.0));
                f.modes.push_back(m);
                CuspForm ss = hodge_star(model, hodge_star(model, f));
                const auto& c = ss.modes.front().ds_part.at(J);
                for (double s : {0.0, 0.8, 2.0})
                    CHECK(c.eval(s).real() == doctest::Approx(sign).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("star of one is the volume form") {
    auto model = real_model(4);
    auto one = radial_function(model, 0.0);
    auto vol = hodge_star(model, one);
    REQUIRE(vol.degree == model.total_dim());
    const uint32_t full = (1u << model.cross_dim()) - 1;
    // volume form: e^{-(n-1)s} ds ^ dt^{1..n-1}
    for (double s : {0.0, 1.0, 3.0})
        CHECK(vol.modes.front().ds_part.at(full).eval(s).real() ==
              doctest::Approx(std::exp(-3.0 * s)).epsilon(1e-12));
    auto back = hodge_star(model, vol);
    for (double s : {0.0, 1.0, 3.0})
        CHECK(back.modes.front().tangential.at(0u).eval(s).real() ==
              doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("d and codifferential square to zero") {
    std::mt19937_64 rng(11001);
    auto model = real_model(5);
    for (int trial = 0; trial < 25; ++trial) {
        for (int degree : {1, 2}) {
            auto f = random_form(model, degree, rng);
            auto dd = exterior_derivative(model, exterior_derivative(model, f));
            CHECK(relative_residual(model, dd, f) < 1e-9);
            if (degree >= 2) {
                auto cc = codifferential(model, codifferential(model, f));
                CHECK(relative_residual(model, cc, f) < 1e-9);
            }
        }
    }
}

TEST_CASE("d squares to zero on sampled coefficients") {
    // the stencil-derivative path has truncation error, hence the looser
    // tolerance than the exact exponential-sum forms
    auto model = real_model(4);
    const auto& gs = model.grid->points();
    std::vector<Complex> vals(gs.size());
    for (size_t i = 0; i < gs.size(); ++i)
        vals[i] = std::exp(-gs[i]) * std::sin(2.0 * gs[i]);
    CuspForm f;
    f.degree = 1;
    FormMode m;
    m.v = {1.0, 0.0, -1.0};
    m.tangential.emplace(0b001u, CoeffFn::sampled(model.grid, vals));
    m.ds_part.emplace(0u, CoeffFn::sampled(model.grid, vals));
    f.modes.push_back(m);
    auto dd = exterior_derivative(model, exterior_derivative(model, f));
    CHECK(relative_residual(model, dd, f) < 1e-6);
}

TEST_CASE("d of a pure s-form vanishes") {
    auto model = real_model(3);
    CuspForm f;
    f.degree = 1;
    FormMode m;
    m.v.assign(model.cross_dim(), 0.0);
    m.ds_part.emplace(0u, CoeffFn::exponential(1.0, -2.0));  // e^{-2s} ds
    f.modes.push_back(m);
    auto df = exterior_derivative(model, f);
    CHECK(relative_residual(model, df, f) < 1e-14);
    // d annihilates constants as well
    auto c = radial_function(model, 0.0);
    CHECK(relative_residual(model, exterior_derivative(model, c), c) < 1e-14);
}

TEST_CASE("degree guards") {
    auto model = real_model(3);
    auto f = radial_function(model, -1.0);
    CHECK_THROWS_AS(codifferential(model, f), DomainError);
    CuspForm top;
    top.degree = model.total_dim();
    FormMode m;
    m.v.assign(model.cross_dim(), 0.0);
    m.ds_part.emplace((1u << model.cross_dim()) - 1, CoeffFn::exponential(1.0, 0.0));
    top.modes.push_back(m);
    CHECK_THROWS_AS(exterior_derivative(model, top), DomainError);
}

TEST_CASE("codifferential of d reproduces the radial Laplacian") {
    auto model = real_model(5);
    const double n1 = model.n - 1;
    // exact exponential profile: delta d f = -f'' + (n-1) f'
    for (double rate : {-0.5, -1.5}) {
        auto f = radial_function(model, rate);
        auto lap = codifferential(model, exterior_derivative(model, f));
        for (double s : {0.3, 1.0, 2.5}) {
            const double expected = (-rate * rate + n1 * rate) * std::exp(rate * s);
            CHECK(lap.modes.front().tangential.at(0u).eval(s).real() ==
                  doctest::Approx(expected).epsilon(1e-11));
        }
    }
    // sampled Gaussian profile with stencil derivatives only
    const auto& gs = model.grid->points();
    std::vector<Complex> vals(gs.size());
    for (size_t i = 0; i < gs.size(); ++i) vals[i] = std::exp(-(gs[i] - 2.0) * (gs[i] - 2.0));
    CuspForm g;
    g.degree = 0;
    FormMode m;
    m.v.assign(model.cross_dim(), 0.0);
    m.tangential.emplace(0u, CoeffFn::sampled(model.grid, vals));
    g.modes.push_back(m);
    auto lap = codifferential(model, exterior_derivative(model, g));
    for (double s : {1.0, 2.0, 3.0}) {
        const double fp = -2.0 * (s - 2.0) * std::exp(-(s - 2.0) * (s - 2.0));
        const double fpp = (4.0 * (s - 2.0) * (s - 2.0) - 2.0) * std::exp(-(s - 2.0) * (s - 2.0));
        CHECK(lap.modes.front().tangential.at(0u).eval(s).real() ==
              doctest::Approx(-fpp + n1 * fp).epsilon(1e-5));
    }
}

TEST_CASE("zero mode is closed and coclosed") {
    auto model = real_model(3);  // k = 1: two tangential indices, one ds index
    auto zm = make_zero_mode(model, {1.0, 0.0}, {0.0});
    CHECK(harmonicity_residual(model, zm) < 1e-10);
    auto zm2 = make_zero_mode(model, {0.3, -0.7}, {0.9});
    CHECK(harmonicity_residual(model, zm2) < 1e-10);
    CHECK_THROWS_AS(make_zero_mode(real_model(4), {1.0}, {1.0}), DomainError);
}

TEST_CASE("zero mode is L2 only when it vanishes") {
    auto model = real_model(3);
    auto zero = make_zero_mode(model, {0.0, 0.0}, {0.0});
    CHECK(slab_l2_norm(model, zero, 0.0, kInfHeight) == doctest::Approx(0.0));
    CHECK_THROWS_AS(slab_l2_norm(model, make_zero_mode(model, {1.0, 0.0}, {0.0}), 0.0,
                                 kInfHeight),
                    DivergenceError);
    CHECK_THROWS_AS(slab_l2_norm(model, make_zero_mode(model, {0.0, 0.0}, {1.0}), 0.0,
                                 kInfHeight),
                    DivergenceError);

    // finite slab of the tangential part: density is constant in s
    auto tangential = make_zero_mode(model, {1.0, 0.0}, {0.0});
    CHECK(slab_l2_norm(model, tangential, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

    // measured slab-density exponents: 0 for the tangential part, 2 for
    // the ds part (computed from the slab integrand log-slope)
    auto ds_only = make_zero_mode(model, {0.0, 0.0}, {1.0});
    auto dens = [&](const CuspForm& f, double s) { return slice_norm_sq(model, f, s); };
    const double slope_t = std::log(dens(tangential, 3.0) / dens(tangential, 1.0)) / 2.0;
    const double slope_d = std::log(dens(ds_only, 3.0) / dens(ds_only, 1.0)) / 2.0;
    CHECK(slope_t == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(slope_d == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("slab norms scale quadratically and see the cusp volume decay") {
    auto model = real_model(4);
    auto f = radial_function(model, -1.0);
    const double base = slab_l2_norm(model, f, 0.0, 2.0);
    auto g = scale_form(f, 3.0);
    CHECK(slab_l2_norm(model, g, 0.0, 2.0) == doctest::Approx(9.0 * base).epsilon(1e-12));

    // volume of the slab beyond height k: e^{-k(n-1)} times the base value
    auto one = radial_function(model, 0.0);
    one.decay_tag = false;
    const double v0 = slab_l2_norm(model, one, 0.0, kInfHeight);
    for (double k : {0.5, 1.0, 2.0})
        CHECK(slab_l2_norm(model, one, k, kInfHeight) ==
              doctest::Approx(std::exp(-k * 3.0) * v0).epsilon(1e-12));
}

TEST_CASE("harmonic mode solve: residual, mu, decay") {
    auto model = real_model(5);
    HarmonicModeDiagnostics diag;
    auto h = solve_harmonic_mode(model, 1, model.dual_vector({1, 0, 0, 0}), &diag);
    CHECK(diag.residual < 1e-8);
    CHECK(h.harmonic_flag);
    CHECK(slab_l2_norm(model, h, 0.0, kInfHeight) == doctest::Approx(1.0).epsilon(1e-8));

    // mu < 1/2 wherever the form has mass
    auto rep = verify_cusp_balance(model, h, 0.0);
    CHECK(rep.mu_max < 0.5);
    CHECK(rep.residual < 1e-6);
    CHECK(rep.boundary_monotone);

    // balance identity at several heights
    for (double u : {0.5, 1.0, 2.0}) {
        auto r = verify_cusp_balance(model, h, u);
        CHECK(r.residual < 1e-6);
    }

    // cuspidal decay with the explicit constant (n+1-2k)/(n-1-2k)
    const double total = slab_l2_norm(model, h, 0.0, kInfHeight);
    const double c_nk = (5.0 + 1 - 2) / (5.0 - 1 - 2);
    for (double s : {0.5, 1.0, 2.0}) {
        const double tail = slab_l2_norm(model, h, s, kInfHeight);
        CHECK(tail <= c_nk * std::exp(-2.0 * s) * total + 1e-8);
    }

    // doubling the mode frequency speeds up the decay
    auto h2 = solve_harmonic_mode(model, 1, model.dual_vector({2, 0, 0, 0}));
    CHECK(slab_l2_norm(model, h2, 2.0, kInfHeight) < slab_l2_norm(model, h, 2.0, kInfHeight));

    // degree-0 modes cannot be strongly harmonic
    CHECK_THROWS_AS(solve_harmonic_mode(model, 0, model.dual_vector({1, 0, 0, 0})),
                    SolverFailure);
}

TEST_CASE("harmonic mode solve on a skew lattice mode") {
    // non-axis dual vector: the rotated-frame construction must still work
    RatMat b = {{Rational(2), Rational(0), Rational(0), Rational(0)},
                {Rational(1), Rational(3), Rational(0), Rational(0)},
                {Rational(0), Rational(0), Rational(1), Rational(0)},
                {Rational(0), Rational(0), Rational(0), Rational(2)}};
    auto model = CuspModel::real_cusp(5, IntegerLattice::from_basis(b));
    auto h = solve_harmonic_mode(model, 1, model.dual_vector({1, 1, 0, 0}));
    CHECK(harmonicity_residual(model, h) < 1e-8);
    CHECK(verify_cusp_balance(model, h, 0.5).residual < 1e-6);
}

TEST_CASE("critical-degree inequality on the two-torus cusp") {
    auto model = real_model(3);  // n = 3, critical degree k = 1
    auto h = solve_harmonic_mode(model, 1, model.dual_vector({1, 0}));
    for (double r0 : {0.0, 1.0, 2.0}) {
        auto rep = verify_cusp_balance(model, h, r0);
        REQUIRE(rep.critical_margin.has_value());
        CHECK(*rep.critical_margin >= 0.0);
        CHECK(rep.mu_max < 0.5);
    }
}

TEST_CASE("fourier primitive inverts d on the mode") {
    auto model = real_model(5);
    auto h = solve_harmonic_mode(model, 1, model.dual_vector({1, 0, 0, 0}));
    auto b = fourier_primitive(model, h);
    auto db = exterior_derivative(model, b);
    auto diff = add_forms(db, scale_form(h, -1.0));
    CHECK(relative_residual(model, diff, h) < 1e-8);

    // the slice pairing agrees with the slice norm on the diagonal
    for (double s : {0.0, 0.5, 1.5})
        CHECK(slice_inner(model, h, h, s) ==
              doctest::Approx(slice_norm_sq(model, h, s)).epsilon(1e-12));

    // boundary estimate |int <ds ^ b, h>| <= e^{-R}/(2 pi |v|) int |h|^2
    const double vnorm = h.modes.front().v_norm();
    for (double R : {0.5, 1.0, 2.0}) {
        const double lhs = std::fabs(slice_inner(model, wedge_ds(model, b), h, R));
        const double rhs =
            std::exp(-R) / (2.0 * M_PI * vnorm) * slice_norm_sq(model, h, R);
        CHECK(lhs <= rhs * (1 + 1e-9) + 1e-30);
        CHECK(lhs > 0);  // the pairing is genuinely nonzero at these heights
    }
}

TEST_CASE("complex cusp: horizontal and fiber modes") {
    auto model = CuspModel::complex_cusp(2, cubic(2), 1.0);
    REQUIRE(model.cross_dim() == 3);
    REQUIRE(model.weights[0] == 2);

    // star squares correctly on the weighted cross section too
    std::mt19937_64 rng(11002);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_form(model, 1, rng, -7.0, -5.0);
        auto ss = hodge_star(model, hodge_star(model, f));
        const double sign = (1 * (model.total_dim() - 1)) % 2 == 0 ? 1.0 : -1.0;
        auto diff = add_forms(ss, scale_form(f, -sign));
        CHECK(relative_residual(model, diff, f) < 1e-9);
        auto dd = exterior_derivative(model, exterior_derivative(model, f));
        CHECK(relative_residual(model, dd, f) < 1e-9);
    }

    // horizontal mode: fiber contraction vanishes
    std::vector<double> vh = {0.0, 1.0, 0.0};
    auto h = solve_harmonic_mode(model, 1, vh);
    CHECK(harmonicity_residual(model, h) < 1e-8);
    CHECK(slice_dir_norm_sq(model, h, 0, 0.7) == doctest::Approx(0.0));
    auto rep = verify_cusp_balance(model, h, 0.0);
    CHECK(rep.residual < 1e-6);

    // fiber mode: weight-2 direction drives the mu_J term
    std::vector<double> vf = {1.0, 0.0, 0.0};
    auto hf = solve_harmonic_mode(model, 1, vf);
    CHECK(harmonicity_residual(model, hf) < 1e-8);
    CHECK(slice_dir_norm_sq(model, hf, 0, 0.7) > 0.0);
    auto repf = verify_cusp_balance(model, hf, 0.5);
    CHECK(repf.residual < 1e-6);

    // mixed modes are rejected
    CHECK_THROWS_AS(solve_harmonic_mode(model, 1, std::vector<double>{1.0, 1.0, 0.0}),
                    SolverFailure);
}

TEST_CASE("form serialization carries modes and grid") {
    auto model = real_model(3);
    auto zm = make_zero_mode(model, {1.0, 0.5}, {0.25});
    auto js = zm.to_json(model);
    CHECK(js.find("\"degree\":1") != std::string::npos);
    CHECK(js.find("closedForm") != std::string::npos);
    CHECK(js.find("\"grid\"") != std::string::npos);
}
