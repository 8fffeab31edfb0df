#pragma once

#include <string>
#include <vector>

#include "rankone/space.hpp"

namespace rankone {

enum class CoeffGroup { SU, SO };

std::string to_string(CoeffGroup g);

// The coupled first-order systems for the radial matrix coefficients:
// (phi, psi) for SU(n,1) in degree 1, (f, b) for SO(n,1) in degree k.
struct CoeffSystem {
    CoeffGroup group;
    int n;
    int degree;  // m = 1 required for SU; 1 <= k <= (n-1)/2 for SO

    static CoeffSystem su(int n);
    static CoeffSystem so(int n, int k);

    bool critical() const { return group == CoeffGroup::SO && n == 2 * degree + 1; }
    std::string label() const;
};

// State (first, second) = (phi, psi) or (f, b).
struct CoeffState {
    double first = 0;
    double second = 0;
};

CoeffState system_rhs(const CoeffSystem& sys, double t, const CoeffState& s);

// Regular solution at small eps from the two-term expansion about the
// singular point t = 0; the regularity constraint pins second(0) = 1/n
// (SU) or k/n (SO) with first(0) = 1.
CoeffState series_init(const CoeffSystem& sys, double eps);
CoeffState series_init_limit(const CoeffSystem& sys);  // exact state at t = 0

struct CoeffTrajectory {
    CoeffSystem sys;
    std::vector<double> t;
    std::vector<CoeffState> states;
    std::vector<CoeffState> derivs;      // rhs at each node, for dense output
    std::vector<double> local_errors;    // per-step error estimate
    CoeffState derived_init;             // state at t = 0 from the singular analysis
    double t_end = 0;

    CoeffState at(double ti) const;      // cubic Hermite dense output
    void write_csv(std::ostream& out) const;
};

// Adaptive embedded Dormand-Prince 5(4) from series_init(1e-4) to t_end.
CoeffTrajectory integrate(const CoeffSystem& sys, double t_end, double tol = 1e-10);

// Independent fixed-step classical RK4 oracle (default step 1e-4).
CoeffTrajectory integrate_fixed_rk4(const CoeffSystem& sys, double t_end, double step = 1e-4);

struct CheckLine {
    std::string name;
    double margin = 0;   // >= 0 means pass for blocking checks
    double value = 0;    // measured quantity
    bool blocking = true;
    bool pass = false;
};

struct AsymptoticsReport {
    std::vector<CheckLine> checks;
    double explicit_constant = 0;  // c (SO) or the SU lower constant
    bool all_pass() const;
};

// Positivity, the integrating-factor monotonicity statements, and the
// explicit lower constants, evaluated along a trajectory on [1, t_end].
AsymptoticsReport verify_asymptotics(const CoeffTrajectory& traj);

// Explicit SO lower constant
//   c = exp(-(k/n) int_0^1 2(n-2k) cosh^2(s/2) tanh^2(s/2)/sinh(s) ds)
//       * (n-k) 2^k tanh^k(1/2) / n.
double so_explicit_constant(int n, int k);

// SU lower constant (n-1)/n * tanh^2(1/2) * e^{-1} for the boundary
// functional sinh(t) tanh(t/2) (phi - psi).
double su_lower_constant(int n);

// Denominator integral int_0^R first(t)^2 sinh^{m(l)+m(2l)} cosh^{m(2l)} dt
// over the trajectory; relative quadrature error < 1e-8.
double dw_denominator(const RankOneSpace& space, const CoeffTrajectory& traj, double R);

// Least-squares slope of log(denominator) against R on [r0, r1].
double dw_log_slope(const RankOneSpace& space, const CoeffTrajectory& traj, double r0, double r1,
                    int samples = 11);

// Residuals of the integrating-factor identities along the trajectory
// (analytic d/dt via the rhs). Returns the max relative residual.
double integrating_factor_residual(const CoeffTrajectory& traj);

}  // namespace rankone
