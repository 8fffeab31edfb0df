#include "rankone/matrix_coeff.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rankone/errors.hpp"
#include "rankone/quadrature.hpp"

namespace rankone {

std::string to_string(CoeffGroup g) { return g == CoeffGroup::SU ? "SU" : "SO"; }

CoeffSystem CoeffSystem::su(int n) {
    if (n < 2) throw DomainError("SU(n,1) needs n >= 2");
    return CoeffSystem{CoeffGroup::SU, n, 1};
}

CoeffSystem CoeffSystem::so(int n, int k) {
    if (n < 3) throw DomainError("SO(n,1) needs n >= 3");
    if (k < 1 || 2 * k > n - 1)
        throw DomainError("SO degree must satisfy 1 <= k <= (n-1)/2");
    return CoeffSystem{CoeffGroup::SO, n, k};
}

std::string CoeffSystem::label() const {
    return to_string(group) + "(" + std::to_string(n) + ",1) k=" + std::to_string(degree);
}

CoeffState system_rhs(const CoeffSystem& sys, double t, const CoeffState& s) {
    if (!(t > 0)) throw DomainError("rhs is singular at t <= 0; use series_init");
    const double coth = 1.0 / std::tanh(t);
    const double csch = 1.0 / std::sinh(t);
    const double x = s.first - s.second;  // phi - psi  /  f - b
    double xp, sp;
    if (sys.group == CoeffGroup::SU) {
        const int n = sys.n;
        xp = -(coth + csch) * x + (n - 1) * (coth + csch) * s.second;
        sp = -((2 * n - 2) * coth + 2 * std::tanh(t)) * s.second + 2 * csch * x;
    } else {
        const int n = sys.n, k = sys.degree;
        xp = -k * coth * x + (n - k) * csch * s.second;
        sp = -(n - k) * coth * s.second + k * csch * x;
    }
    return CoeffState{xp + sp, sp};
}

CoeffState series_init_limit(const CoeffSystem& sys) {
    if (sys.group == CoeffGroup::SU) return CoeffState{1.0, 1.0 / sys.n};
    return CoeffState{1.0, (double)sys.degree / sys.n};
}

CoeffState series_init(const CoeffSystem& sys, double eps) {
    if (!(eps > 0) || eps > 1e-3) throw DomainError("series_init needs 0 < eps <= 1e-3");
    const double e2 = eps * eps;
    if (sys.group == CoeffGroup::SU) {
        const double n = sys.n;
        // regular-solution balance of the 1/t terms: psi(0) = 1/n
        const double y0 = 1.0 / n, x0 = (n - 1.0) / n;
        const double y2 = -1.0 / n, x2 = -(n - 1.0) / (2.0 * n);
        const double x = x0 + x2 * e2, y = y0 + y2 * e2;
        return CoeffState{x + y, y};
    }
    const double n = sys.n, k = sys.degree;
    // balance k(f-b) = (n-k)b at t = 0: b(0) = k/n
    const double x0 = (n - k) / n, y0 = k / n;
    const double x2 = -k * x0 * (n + 1 - k) / (2.0 * (n + 2.0));
    const double y2 = -k * x0 * (k + 1.0) / (2.0 * (n + 2.0));
    const double x = x0 + x2 * e2, y = y0 + y2 * e2;
    return CoeffState{x + y, y};
}

CoeffState CoeffTrajectory::at(double ti) const {
    if (t.empty()) throw DomainError("empty trajectory");
    if (ti < t.front() - 1e-12 || ti > t.back() + 1e-12)
        throw DomainError("time outside the integrated range");
    ti = std::clamp(ti, t.front(), t.back());
    auto it = std::upper_bound(t.begin(), t.end(), ti);
    size_t i = (it == t.begin()) ? 0 : (size_t)(it - t.begin()) - 1;
    if (i + 1 >= t.size()) i = t.size() - 2;
    const double h = t[i + 1] - t[i];
    const double u = (ti - t[i]) / h;
    auto hermite = [&](double y0, double y1, double d0, double d1) {
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 +
               (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
    };
    return CoeffState{hermite(states[i].first, states[i + 1].first, derivs[i].first,
                              derivs[i + 1].first),
                      hermite(states[i].second, states[i + 1].second, derivs[i].second,
                              derivs[i + 1].second)};
}

void CoeffTrajectory::write_csv(std::ostream& out) const {
    out << "t,state1,state2,localError\n";
    char buf[160];
    for (size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.3e\n", t[i], states[i].first,
                      states[i].second, local_errors[i]);
        out << buf;
    }
}

namespace {

// Dormand-Prince 5(4) tableau
const double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
const double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
const double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
const double kB4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                       -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

constexpr double kMaxStep = 0.02;  // cap keeps the Hermite dense output at ~1e-10

CoeffState axpy(const CoeffState& y, double h, const CoeffState& d) {
    return CoeffState{y.first + h * d.first, y.second + h * d.second};
}

}  // namespace

CoeffTrajectory integrate(const CoeffSystem& sys, double t_end, double tol) {
    if (t_end > 50) throw DomainError("t_end must be <= 50");
    if (tol < 1e-12) throw DomainError("tolerance must be >= 1e-12");
    const double t0 = 1e-4;
    if (t_end < t0) throw DomainError("t_end must exceed the series start 1e-4");

    CoeffTrajectory traj;
    traj.sys = sys;
    traj.derived_init = series_init_limit(sys);
    traj.t_end = t_end;

    double t = t0;
    CoeffState y = series_init(sys, t0);
    traj.t.push_back(t);
    traj.states.push_back(y);
    traj.derivs.push_back(system_rhs(sys, t, y));
    traj.local_errors.push_back(0.0);

    double h = 1e-6;
    const double atol = 1e-14;
    while (t < t_end - 1e-14) {
        h = std::min(h, std::min(kMaxStep, t_end - t));
        if (h < 1e-14) throw NumericError("step-size underflow: system too stiff at t=" +
                                          std::to_string(t));
        CoeffState k[7];
        k[0] = traj.derivs.back();
        bool ok = true;
        for (int i = 1; i < 7; ++i) {
            CoeffState yi = y;
            for (int j = 0; j < i; ++j) yi = axpy(yi, h * kA[i][j], k[j]);
            double ti = t + kC[i] * h;
            if (!(ti > 0)) { ok = false; break; }
            k[i] = system_rhs(sys, ti, yi);
        }
        if (!ok) { h *= 0.5; continue; }
        CoeffState y5 = y, y4 = y;
        for (int i = 0; i < 7; ++i) {
            y5 = axpy(y5, h * kB5[i], k[i]);
            y4 = axpy(y4, h * kB4[i], k[i]);
        }
        const double sc1 = atol + tol * std::max(std::fabs(y.first), std::fabs(y5.first));
        const double sc2 = atol + tol * std::max(std::fabs(y.second), std::fabs(y5.second));
        const double err = std::sqrt(0.5 * (std::pow((y5.first - y4.first) / sc1, 2) +
                                            std::pow((y5.second - y4.second) / sc2, 2)));
        if (err <= 1.0) {
            t += h;
            y = y5;
            traj.t.push_back(t);
            traj.states.push_back(y);
            traj.derivs.push_back(system_rhs(sys, t, y));
            traj.local_errors.push_back(err * tol);
        }
        const double factor = std::clamp(0.9 * std::pow(err > 0 ? 1.0 / err : 1e8, 0.2), 0.2, 5.0);
        h *= factor;
    }
    return traj;
}

CoeffTrajectory integrate_fixed_rk4(const CoeffSystem& sys, double t_end, double step) {
    if (t_end > 50) throw DomainError("t_end must be <= 50");
    // start at 1e-3: keeps the 1/t stiffness within the RK4 stability region
    const double t0 = 1e-3;
    CoeffTrajectory traj;
    traj.sys = sys;
    traj.derived_init = series_init_limit(sys);
    traj.t_end = t_end;

    double t = t0;
    CoeffState y = series_init(sys, t0);
    traj.t.push_back(t);
    traj.states.push_back(y);
    traj.derivs.push_back(system_rhs(sys, t, y));
    traj.local_errors.push_back(0.0);

    const long long n_steps = (long long)std::ceil((t_end - t0) / step);
    const double h = (t_end - t0) / (double)n_steps;
    // record roughly every 0.01 to keep memory sane
    const long long record_every = std::max(1LL, (long long)std::llround(0.01 / h));
    for (long long i = 0; i < n_steps; ++i) {
        CoeffState k1 = system_rhs(sys, t, y);
        CoeffState k2 = system_rhs(sys, t + h / 2, axpy(y, h / 2, k1));
        CoeffState k3 = system_rhs(sys, t + h / 2, axpy(y, h / 2, k2));
        CoeffState k4 = system_rhs(sys, t + h, axpy(y, h, k3));
        y = CoeffState{y.first + h / 6 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first),
                       y.second + h / 6 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second)};
        t = t0 + (i + 1) * h;
        if ((i + 1) % record_every == 0 || i + 1 == n_steps) {
            traj.t.push_back(t);
            traj.states.push_back(y);
            traj.derivs.push_back(system_rhs(sys, t, y));
            traj.local_errors.push_back(0.0);
        }
    }
    return traj;
}

double so_explicit_constant(int n, int k) {
    const double integral = integrate(
        [&](double s) {
            const double c = std::cosh(s / 2), th = std::tanh(s / 2);
            return 2.0 * (n - 2 * k) * c * c * th * th / std::sinh(s);
        },
        0.0, 1.0, 1e-12, 1e-14);
    return std::exp(-integral * k / (double)n) * (n - k) * std::pow(2.0, k) *
           std::pow(std::tanh(0.5), k) / (double)n;
}

double su_lower_constant(int n) {
    const double th = std::tanh(0.5);
    return (n - 1.0) / n * th * th * std::exp(-1.0);
}

bool AsymptoticsReport::all_pass() const {
    for (const auto& c : checks)
        if (c.blocking && !c.pass) return false;
    return true;
}

AsymptoticsReport verify_asymptotics(const CoeffTrajectory& traj) {
    if (traj.t_end < 5) throw DomainError("asymptotics need t_end >= 5");
    AsymptoticsReport rep;
    const CoeffSystem& sys = traj.sys;
    const int n = sys.n;

    auto add = [&](const std::string& name, double margin, double value, bool blocking) {
        rep.checks.push_back(CheckLine{name, margin, value, blocking, margin >= -1e-9});
    };

    double pos_margin = 1e300;
    for (size_t i = 0; i < traj.t.size(); ++i) {
        const auto& s = traj.states[i];
        pos_margin = std::min(pos_margin, std::min(s.first - s.second, s.second));
    }

    if (sys.group == CoeffGroup::SU) {
        double m_nspi = 1e300, m_mono = 1e300, m_lower = 1e300;
        double inf_sp = 1e300, sup_sp = 0, sup_ratio = 0;
        double prev_g = -1e300;
        const double lower_c = su_lower_constant(n);
        rep.explicit_constant = lower_c;
        for (size_t i = 0; i < traj.t.size(); ++i) {
            const double t = traj.t[i];
            const auto& s = traj.states[i];
            m_nspi = std::min(m_nspi, s.first - n * s.second);
            const double g = std::sinh(t) * std::pow(std::tanh(t / 2), 2 * n - 1) *
                             (s.first - n * s.second);
            if (i > 0) m_mono = std::min(m_mono, g - prev_g);
            prev_g = g;
            if (t >= 1.0) {
                const double f = std::sinh(t) * std::tanh(t / 2) * (s.first - s.second);
                m_lower = std::min(m_lower, f - lower_c);
                const double sp = std::sinh(t) * s.first;
                inf_sp = std::min(inf_sp, sp);
                sup_sp = std::max(sup_sp, sp);
            }
            sup_ratio = std::max(sup_ratio, std::sinh(t) * s.first / std::tanh(t / 2));
        }
        add("phi > psi > 0", pos_margin, pos_margin, true);
        add("phi >= n psi", m_nspi, m_nspi, true);
        add("sinh tanh^{2n-1}(t/2)(phi-n psi) nondecreasing", m_mono, m_mono, true);
        add("sinh tanh(t/2)(phi-psi) >= (n-1)/n tanh^2(1/2) e^-1", m_lower, lower_c, true);
        add("inf sinh*phi on [1,T] > 0", inf_sp, inf_sp, true);
        add("sup sinh*phi on [1,T] (recorded)", 0, sup_sp, false);
        add("sup sinh*phi/tanh(t/2) (recorded)", 0, sup_ratio, false);
    } else {
        const int k = sys.degree;
        double m_bf = 1e300, m_lower = 1e300, m_tf = 1e300;
        const double c = so_explicit_constant(n, k);
        rep.explicit_constant = c;
        for (size_t i = 0; i < traj.t.size(); ++i) {
            const double t = traj.t[i];
            const auto& s = traj.states[i];
            m_bf = std::min(m_bf, (double)k / n * s.first - s.second);
            if (t >= 1.0) {
                m_lower = std::min(m_lower, s.first * std::pow(std::sinh(t), k) - c);
                m_tf = std::min(m_tf, t * s.first);
            }
        }
        add("f > b > 0", pos_margin, pos_margin, true);
        add("b <= (k/n) f", m_bf, m_bf, true);
        add("f sinh^k >= explicit c", m_lower, c, true);
        if (sys.critical()) add("t*f bounded below on [1,T]", m_tf, m_tf, true);
    }
    return rep;
}

double integrating_factor_residual(const CoeffTrajectory& traj) {
    const CoeffSystem& sys = traj.sys;
    const int n = sys.n;
    double worst = 0;
    // both sides may be tiny differences of large terms at big t, so the
    // defect is measured against the magnitude of the constituent terms
    auto rel = [](double a, double b, double rhs) {
        return std::fabs(a + b - rhs) /
               std::max({std::fabs(a), std::fabs(b), std::fabs(rhs), 1e-300});
    };
    for (size_t i = 0; i < traj.t.size(); ++i) {
        const double t = traj.t[i];
        if (t < 1e-3) continue;  // avoid amplifying the 1/t coefficients
        const auto& s = traj.states[i];
        const CoeffState d = system_rhs(sys, t, s);
        const double sh = std::sinh(t), ch = std::cosh(t), th2 = std::tanh(t / 2);
        const double dth2 = 0.5 / (std::cosh(t / 2) * std::cosh(t / 2));
        if (sys.group == CoeffGroup::SO) {
            const int k = sys.degree;
            const double x = s.first - s.second, xp = d.first - d.second;
            // d/dt [ sinh^k (f-b) ] = (n-k) sinh^{k-1} b
            worst = std::max(worst, rel(k * std::pow(sh, k - 1) * ch * x,
                                        std::pow(sh, k) * xp,
                                        (n - k) * std::pow(sh, k - 1) * s.second));
            // d/dt [ sinh^{n-k} b ] = k sinh^{n-k-1} (f-b)
            worst = std::max(worst, rel((n - k) * std::pow(sh, n - k - 1) * ch * s.second,
                                        std::pow(sh, n - k) * d.second,
                                        k * std::pow(sh, n - k - 1) * x));
        } else {
            const double x = s.first - s.second, xp = d.first - d.second;
            // d/dt [ sinh tanh(t/2) (phi-psi) ] = (n-1)(cosh+1) tanh(t/2) psi
            worst = std::max(worst, rel((ch * th2 + sh * dth2) * x, sh * th2 * xp,
                                        (n - 1) * (ch + 1) * th2 * s.second));
            // d/dt [ (sinh/tanh(t/2)) phi ] = -[(n-2)(cosh-1)/sinh + 2 tanh](sinh/tanh(t/2)) psi
            worst = std::max(
                worst, rel((ch / th2 - sh * dth2 / (th2 * th2)) * s.first, sh / th2 * d.first,
                           -((n - 2) * (ch - 1) / sh + 2 * std::tanh(t)) * sh / th2 * s.second));
            // d/dt [ sinh tanh^{2n-1}(t/2)(phi - n psi) ]
            //   = (2n-2)[(n-1)(cosh-1)/sinh + tanh] sinh tanh^{2n-1}(t/2) psi
            const double tp = std::pow(th2, 2 * n - 1);
            worst = std::max(
                worst,
                rel((ch * tp + sh * (2 * n - 1) * std::pow(th2, 2 * n - 2) * dth2) *
                        (s.first - n * s.second),
                    sh * tp * (d.first - n * d.second),
                    (2 * n - 2) * ((n - 1) * (ch - 1) / sh + std::tanh(t)) * sh * tp * s.second));
        }
    }
    return worst;
}

double dw_denominator(const RankOneSpace& space, const CoeffTrajectory& traj, double R) {
    if (R > traj.t.back() + 1e-12) throw DomainError("R beyond the integrated trajectory");
    const int a = space.mult_lambda() + space.mult_2lambda();
    const int b = space.mult_2lambda();
    auto weight = [&](double t) {
        return std::pow(std::sinh(t), a) * std::pow(std::cosh(t), b);
    };
    const double t0 = traj.t.front();
    // head [0, t0]: the matrix coefficient is 1 + O(t0^2) there
    double head = integrate(weight, 0.0, std::min(t0, R), 1e-10, 1e-30);
    if (R <= t0) return head;
    double body = integrate(
        [&](double t) {
            const double v = traj.at(t).first;
            return v * v * weight(t);
        },
        t0, R, 1e-9, 1e-30);
    return head + body;
}

double dw_log_slope(const RankOneSpace& space, const CoeffTrajectory& traj, double r0, double r1,
                    int samples) {
    if (samples < 2) throw DomainError("need at least two samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < samples; ++i) {
        const double r = r0 + (r1 - r0) * i / (samples - 1);
        const double y = std::log(dw_denominator(space, traj, r));
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
    }
    return (samples * sxy - sx * sy) / (samples * sxx - sx * sx);
}

}  // namespace rankone
