#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankone/rational.hpp"
#include "rankone/space.hpp"

namespace rankone {

// User-supplied geometric data; the calculators never construct lattices
// or manifolds themselves.
struct BoundInputs {
    RankOneSpace space;
    int k = 0;
    double vol = 1.0;        // total volume
    double v_min = 1.0;      // V_min of the thick part
    double inj_thick = 1.0;  // injectivity radius of the thick part
    std::vector<double> cusp_vols;
    std::vector<double> cusp_lattice_deltas;
    double v_min_cusp = 0;   // V_min over the cusp slabs; defaults to v_min
};

enum class ConstantPolicy { Explicit, Existential };

struct ExponentEntry {
    std::string input;
    Rational exponent;
};

// A computed bound: exact exponents per input, declared constant policy,
// and the numeric value with constant 1 when the constant is existential.
struct BoundReport {
    std::string formula_id;
    double value = 0;
    std::vector<ExponentEntry> exponents;
    bool inj_scales_vmin = false;  // boxed H/O bounds: vMin exponent per unit inj
    ConstantPolicy policy = ConstantPolicy::Existential;
    double constant = 1.0;

    Rational exponent_of(const std::string& input) const;
    std::string to_json() const;
};

// Compact-quotient Betti bound shapes per family.
BoundReport compact_bound(const BoundInputs& in);

// Volume exponent for principal congruence towers, b <= C Vol^{exponent}.
enum class Setting { Compact, Cusped };
enum class CongruenceGroup { SO, SU };
Rational congruence_exponent(CongruenceGroup group, int n, int k, Setting setting);

// Two-term cusped L2-cohomology bound (thick part + cusp slabs), and the
// critical-degree Vol/inj form.
BoundReport cusped_l2_bound(const BoundInputs& in);

// R_{n,k} = ln(2(n+1-2k)/(n-1-2k)) / (n-1-2k)
double peaking_threshold(int n, int k);

// sum_{j=1}^{nu+1} j^{-2} / (2 zeta(2)); increasing, < 1/2
double nu_threshold(int nu);

// membership in the index set I(nu): e^{2-nu}/(2 pi delta) < 1/(4(nu+1)^2)
std::vector<bool> nu_index_set(int nu, const std::vector<double>& deltas);

// e^{-nu} volSlab (1+40(nu+1)^2)^{n+1} (lambda1^{-1}/(20(nu+1)^2) + e^{-nu}/2)^{n-2}
double critical_cusp_bound(int nu, double vol_slab, double lambda1, int n,
                           bool hypothesis_verified);

// (nu+1)^2 e^{-(n-2) nu} volSlab / inj
double critical_cusp_bound_henmay(int nu, double vol_slab, double inj, int n);

struct CuspCountBound {
    double max_cusps = 0;
    double ratio = 0;  // 1 / vol(B_{inj/2})
};
CuspCountBound cusp_count_bound(const RankOneSpace& space, double inj_thick, double vol);

struct DeRhamCriticalBound {
    double value = 0;        // vol * (L * ratio + c/inj)
    double cusp_term = 0;    // L * ratio
    double l2_term = 0;      // c / inj (c existential, reported 1)
    double ratio = 0;
    bool cusp_term_dominates = false;
};
DeRhamCriticalBound derham_critical_bound(const RankOneSpace& space, double inj_thick, double vol,
                                          double l_n_policy = 1.0);

struct PeakingReport {
    double mean = 0;
    double std_error = 0;
    double exact = 0;  // 1/b
    long long trials = 0;
    bool pass = false;  // |mean - 1/b| <= 3 std errors
};
// Monte-Carlo check that the unit-volume sphere average of h_1^2 is 1/b.
PeakingReport verify_peaking_identity(int b, long long trials, uint64_t seed);

}  // namespace rankone
