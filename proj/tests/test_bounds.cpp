#include <cmath>

#include "doctest.h"
#include "rankone/bounds.hpp"
#include "rankone/errors.hpp"

using namespace rankone;

TEST_CASE("compact bound exponents") {
    BoundInputs in{RankOneSpace::make(FieldKind::C, 3), 1, 100.0, 8.0, 2.0, {}, {}, 0};
    auto rep = compact_bound(in);
    CHECK(rep.exponent_of("vMin") == Rational(-2, 3));
    CHECK(rep.value == doctest::Approx(100.0 * std::pow(8.0, -2.0 / 3.0)).epsilon(1e-12));
    CHECK(rep.policy == ConstantPolicy::Existential);

    // critical real degree: c/inj shape
    BoundInputs rc{RankOneSpace::make(FieldKind::R, 5), 2, 100.0, 8.0, 2.0, {}, {}, 0};
    auto rrep = compact_bound(rc);
    CHECK(rrep.exponent_of("inj") == Rational(-1));
    CHECK(rrep.value == doctest::Approx(50.0));

    // real below critical: exponent (2k+1-n)/(n-1)
    BoundInputs rl{RankOneSpace::make(FieldKind::R, 7), 1, 1.0, 8.0, 2.0, {}, {}, 0};
    CHECK(compact_bound(rl).exponent_of("vMin") == Rational(-4, 6));

    // boxed case A for (H, n=4, k=4): vMin exponent -2/9 per unit inj
    BoundInputs hq{RankOneSpace::make(FieldKind::H, 4), 4, 1.0, 8.0, 2.0, {}, {}, 0};
    auto hrep = compact_bound(hq);
    CHECK(hrep.exponent_of("vMin") == Rational(-2, 9));
    CHECK(hrep.inj_scales_vmin);
    CHECK(hrep.value == doctest::Approx(std::pow(8.0, -2.0 / 9.0 * 2.0)).epsilon(1e-12));

    BoundInputs bad{RankOneSpace::make(FieldKind::C, 2), 1, 1.0, 1.0, 2.0, {}, {}, 0};
    CHECK_THROWS_AS(compact_bound(bad), UnsupportedError);
    BoundInputs low_inj{RankOneSpace::make(FieldKind::C, 3), 1, 1.0, 1.0, 0.5, {}, {}, 0};
    CHECK_THROWS_AS(compact_bound(low_inj), DomainError);
}

TEST_CASE("congruence exponents") {
    CHECK(congruence_exponent(CongruenceGroup::SU, 2, 1, Setting::Compact) == Rational(3, 4));
    CHECK(congruence_exponent(CongruenceGroup::SU, 2, 1, Setting::Cusped) == Rational(1, 2));
    CHECK(congruence_exponent(CongruenceGroup::SO, 5, 1, Setting::Cusped) == Rational(11, 15));

    // two printed forms of the SU compact exponent agree identically
    for (int n = 2; n <= 10; ++n)
        for (int k = 1; k < n; ++k) {
            Rational a(n * n + 2 * k, n * n + 2 * n);
            Rational b = Rational(1) + Rational(2 * k - 2 * n, n * n + 2 * n);
            CHECK(congruence_exponent(CongruenceGroup::SU, n, k, Setting::Compact) == a);
            CHECK(a == b);
        }

    // independently re-derived cusped exponents
    for (int n = 3; n <= 10; ++n)
        for (int k = 1; 2 * k < n - 1; ++k) {
            Rational expected = Rational(1) - Rational(4 * (n - 1 - 2 * k), n * (n + 1));
            CHECK(congruence_exponent(CongruenceGroup::SO, n, k, Setting::Cusped) == expected);
        }
    for (int n = 2; n <= 10; ++n)
        for (int k = 1; k < n; ++k) {
            Rational expected = Rational(1) - Rational(4 * (n - k), (n + 1) * (n + 1) - 1);
            CHECK(congruence_exponent(CongruenceGroup::SU, n, k, Setting::Cusped) == expected);
        }

    CHECK_THROWS_AS(congruence_exponent(CongruenceGroup::SO, 5, 2, Setting::Cusped), DomainError);
}

TEST_CASE("cusped bound reduces to the compact shape without cusps") {
    BoundInputs in{RankOneSpace::make(FieldKind::C, 3), 1, 100.0, 8.0, 2.0, {}, {}, 0};
    auto cusped = cusped_l2_bound(in);
    auto compact = compact_bound(in);
    CHECK(cusped.exponent_of("vMin") == compact.exponent_of("vMin"));
    CHECK(cusped.value == doctest::Approx(25.0));

    // real critical: vol/inj
    BoundInputs rc{RankOneSpace::make(FieldKind::R, 3), 1, 10.0, 4.0, 2.0, {1.0}, {1.0}, 0};
    CHECK(cusped_l2_bound(rc).value == doctest::Approx(5.0));

    // cusp term adds with the same exponent on the slab V_min
    BoundInputs two{RankOneSpace::make(FieldKind::C, 3), 1, 100.0, 8.0, 2.0, {3.0, 5.0},
                    {1.0, 1.0}, 8.0};
    CHECK(cusped_l2_bound(two).value == doctest::Approx(100.0 * 0.25 + 8.0 * 0.25));
}

TEST_CASE("peaking threshold") {
    CHECK(peaking_threshold(5, 1) == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-14));
    CHECK(peaking_threshold(5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // n=7, k=1: ln(2 * 6/4)/4 = ln(3)/4
    CHECK(peaking_threshold(7, 1) == doctest::Approx(0.25 * std::log(3.0)).epsilon(1e-14));
    // blow-up toward the critical degree
    CHECK(peaking_threshold(101, 49) > peaking_threshold(101, 40));
    CHECK_THROWS_AS(peaking_threshold(5, 2), DomainError);
}

TEST_CASE("nu threshold") {
    CHECK(nu_threshold(0) == doctest::Approx(3.0 / (M_PI * M_PI)).epsilon(1e-13));
    CHECK(nu_threshold(0) == doctest::Approx(0.303964).epsilon(1e-6));
    CHECK(nu_threshold(1) == doctest::Approx(1.25 * 3.0 / (M_PI * M_PI)).epsilon(1e-13));
    CHECK(nu_threshold(1) == doctest::Approx(0.379955).epsilon(1e-6));
    double prev = 0;
    for (int nu = 0; nu <= 200; ++nu) {
        const double v = nu_threshold(nu);
        CHECK(v < 0.5);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(nu_threshold(100000) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("nu index set membership") {
    auto m = nu_index_set(2, {10.0});
    CHECK(m[0]);
    auto m2 = nu_index_set(0, {1.0});
    CHECK(!m2[0]);
    auto m3 = nu_index_set(3, {1e-9});
    CHECK(!m3[0]);  // delta -> 0 is never a member
}

TEST_CASE("critical cusp bound shapes") {
    // nu=0, lambda1=1, n=3: volSlab * 41^4 * (1/20 + 1/2)
    const double v = critical_cusp_bound(0, 2.0, 1.0, 3, true);
    CHECK(v == doctest::Approx(2.0 * std::pow(41.0, 4) * (0.05 + 0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(critical_cusp_bound(0, 2.0, 1.0, 3, false), DomainError);

    // large nu drives the bound to zero
    CHECK(critical_cusp_bound(40, 2.0, 1.0, 3, true) < critical_cusp_bound(10, 2.0, 1.0, 3, true));
    CHECK(critical_cusp_bound(100, 2.0, 1.0, 3, true) < 1e-20);

    // henmay shape decreasing in nu for n >= 3, nu >= 2
    for (int n = 3; n <= 6; ++n) {
        double prev = 1e300;
        for (int nu = 2; nu <= 12; ++nu) {
            const double h = critical_cusp_bound_henmay(nu, 1.0, 1.0, n);
            CHECK(h < prev);
            prev = h;
        }
    }
}

TEST_CASE("cusp count bound") {
    const auto r3 = RankOneSpace::make(FieldKind::R, 3);
    auto b = cusp_count_bound(r3, 2.0, 100.0);
    CHECK(b.ratio == doctest::Approx(1.0 / (M_PI * (std::sinh(2.0) - 2.0))).epsilon(1e-10));
    CHECK(b.ratio == doctest::Approx(0.1957).epsilon(1e-3));
    CHECK(b.max_cusps == doctest::Approx(100.0 * b.ratio));

    // ratio decreasing in inj
    double prev = 1e300;
    for (double inj : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double r = cusp_count_bound(r3, inj, 1.0).ratio;
        CHECK(r < prev);
        prev = r;
    }
    // monotone under covers: same inj lower bound, larger volume
    CHECK(cusp_count_bound(r3, 2.0, 200.0).ratio <= cusp_count_bound(r3, 2.0, 100.0).ratio);
}

TEST_CASE("de Rham critical bound composition") {
    const auto r3 = RankOneSpace::make(FieldKind::R, 3);
    auto d = derham_critical_bound(r3, 2.0, 100.0, 1.0);
    CHECK(d.value == doctest::Approx(100.0 * (d.ratio + 0.5)).epsilon(1e-12));
    // inj -> infinity drives everything to zero; the ratio term collapses
    // much faster than 1/inj
    auto far = derham_critical_bound(r3, 30.0, 100.0, 1.0);
    CHECK(far.cusp_term < far.l2_term);
    CHECK(!far.cusp_term_dominates);
    CHECK(far.value < d.value);
    CHECK_THROWS_AS(derham_critical_bound(RankOneSpace::make(FieldKind::R, 4), 2.0, 1.0, 1.0),
                    DomainError);
}

TEST_CASE("peaking identity Monte Carlo") {
    auto r1 = verify_peaking_identity(1, 10, 1);
    CHECK(r1.mean == doctest::Approx(1.0));
    CHECK(r1.pass);
    auto r3 = verify_peaking_identity(3, 200000, 20240518);
    CHECK(r3.pass);
    CHECK(r3.mean == doctest::Approx(1.0 / 3).epsilon(0.01));
    auto r10 = verify_peaking_identity(10, 200000, 20240518);
    CHECK(r10.pass);
    CHECK(r10.mean == doctest::Approx(0.1).epsilon(0.01));
}

TEST_CASE("bound report serialization") {
    BoundInputs in{RankOneSpace::make(FieldKind::C, 3), 1, 100.0, 8.0, 2.0, {}, {}, 0};
    auto rep = compact_bound(in);
    auto js = rep.to_json();
    CHECK(js.find("\"formulaId\"") != std::string::npos);
    CHECK(js.find("-2/3") != std::string::npos);
    CHECK(js.find("existential") != std::string::npos);
}
