#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rankone/rational.hpp"

namespace rankone {

using RatVec = std::vector<Rational>;
using RatMat = std::vector<RatVec>;

RatMat rat_mat_mul(const RatMat& a, const RatMat& b);
RatMat rat_mat_transpose(const RatMat& a);
RatMat rat_mat_inverse(const RatMat& a);  // throws DomainError if singular
Rational rat_mat_det(const RatMat& a);

// Full-rank lattice of translations, given by basis rows. All norm
// computations go through the exact rational Gram matrix.
struct IntegerLattice {
    int dim = 0;
    RatMat basis;  // rows are basis vectors
    RatMat gram;   // basis * basis^T

    static IntegerLattice from_basis(RatMat basis_rows);

    // Plain-text format: one basis row per line, entries "p/q" or integers.
    static IntegerLattice parse(std::istream& in);
    static IntegerLattice parse_file(const std::string& path);
    void emit(std::ostream& out) const;

    IntegerLattice scaled(const Rational& c) const;

    // Exact squared norm of an integer coordinate vector.
    Rational norm_sq(const std::vector<long long>& coords) const;
};

IntegerLattice dual_lattice(const IntegerLattice& L);

struct SuccessiveMinima {
    std::vector<double> minima;         // lambda_1 <= ... <= lambda_d
    std::vector<Rational> minima_sq;    // exact squared minima
    double delta = 0;                   // lambda_1 of the dual lattice
    Rational delta_sq;                  // exact squared delta
    // integer coordinates (w.r.t. the input basis) of witnesses realizing
    // the minima; linearly independent, lexicographic tie-breaking
    std::vector<std::vector<long long>> witnesses;
};

// Default node budget for the branch-and-bound enumerations.
inline constexpr long long kDefaultEnumBudget = 10'000'000;

SuccessiveMinima successive_minima(const IntegerLattice& L,
                                   long long node_budget = kDefaultEnumBudget);

// Exact count of lattice vectors with |v| <= R, origin included.
long long count_points_in_ball(const IntegerLattice& L, double R,
                               long long node_budget = kDefaultEnumBudget);

// Lattice point-count check against the packing bound
//   |{v : |v| <= e^nu R}| <= C_n lambda_1^{2-n} (e^nu R + lambda_1/2)^{n-2},
// C_n = 2^{n-2}, valid under the hypothesis e^{nu+1} R < lambda_{n-1}.
struct NboundReport {
    long long count = 0;
    double bound = 0;
    bool satisfied = false;
    double lambda1 = 0;
    double lambda_top = 0;  // lambda_{n-1} of the cross-section lattice
};

NboundReport nbound_check(const IntegerLattice& L, int nu, double R, int ambient_dim,
                          long long node_budget = kDefaultEnumBudget);

// All lattice vectors with exact squared norm <= r_sq (one per +-v pair,
// canonical sign), as (coords, norm^2), unsorted. Exposed for test oracles.
std::vector<std::pair<std::vector<long long>, Rational>> enumerate_up_to(
    const IntegerLattice& L, const Rational& r_sq, long long node_budget = kDefaultEnumBudget);

}  // namespace rankone
