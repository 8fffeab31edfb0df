#include "rankone/cusp_forms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "rankone/errors.hpp"
#include "rankone/quadrature.hpp"

namespace rankone {

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

std::shared_ptr<const SGrid> SGrid::make(double s_max, int count, double stretch) {
    if (!(s_max > 0) || count < 8) throw DomainError("bad grid parameters");
    auto g = std::make_shared<SGrid>();
    g->s_.resize(count);
    const double denom = std::expm1(stretch);
    for (int i = 0; i < count; ++i)
        g->s_[i] = s_max * std::expm1(stretch * i / (count - 1)) / denom;
    g->s_.back() = s_max;
    return g;
}

// ---------------------------------------------------------------------------
// coefficient functions
// ---------------------------------------------------------------------------

namespace {

// derivative weights of the Lagrange polynomial through a window of nodes,
// evaluated at node i of the window:
//   l_i'(x_i) = sum_{l != i} 1/(x_i - x_l)
//   l_j'(x_i) = prod_{l != i,j} (x_i - x_l) / [ (x_j - x_i) prod_{l != i,j} (x_j - x_l) ]
std::vector<double> lagrange_deriv_weights(const std::vector<double>& x, size_t i) {
    const size_t m = x.size();
    std::vector<double> w(m, 0.0);
    for (size_t j = 0; j < m; ++j) {
        if (j == i) {
            double s = 0;
            for (size_t l = 0; l < m; ++l)
                if (l != i) s += 1.0 / (x[i] - x[l]);
            w[j] = s;
        } else {
            double num = 1.0, den = x[j] - x[i];
            for (size_t l = 0; l < m; ++l) {
                if (l == i || l == j) continue;
                num *= (x[i] - x[l]);
                den *= (x[j] - x[l]);
            }
            w[j] = num / den;
        }
    }
    return w;
}

std::vector<Complex> stencil_derivative(const GridPtr& grid, const std::vector<Complex>& v) {
    const auto& s = grid->points();
    const size_t n = s.size();
    std::vector<Complex> d(n);
    for (size_t i = 0; i < n; ++i) {
        size_t lo = i >= 2 ? i - 2 : 0;
        size_t hi = std::min(lo + 5, n);
        lo = hi >= 5 ? hi - 5 : 0;
        std::vector<double> xs(s.begin() + lo, s.begin() + hi);
        auto w = lagrange_deriv_weights(xs, i - lo);
        Complex acc = 0;
        for (size_t j = 0; j < xs.size(); ++j) acc += w[j] * v[lo + j];
        d[i] = acc;
    }
    return d;
}

}  // namespace

CoeffFn CoeffFn::exponential(Complex amp, double rate) {
    CoeffFn f;
    if (amp != Complex(0)) f.terms_.push_back({amp, rate});
    return f;
}

CoeffFn CoeffFn::sampled(GridPtr grid, std::vector<Complex> values, std::vector<Complex> d1,
                         std::vector<Complex> d2) {
    if (!grid || values.size() != grid->size()) throw DomainError("bad sampled coefficient");
    CoeffFn f;
    f.sampled_ = true;
    f.grid_ = std::move(grid);
    f.values_ = std::move(values);
    f.d1_ = d1.empty() ? stencil_derivative(f.grid_, f.values_) : std::move(d1);
    f.d2_ = std::move(d2);
    return f;
}

bool CoeffFn::is_zero(double tol) const {
    if (!sampled_) {
        for (const auto& t : terms_)
            if (std::abs(t.amp) > tol) return false;
        return true;
    }
    for (const auto& v : values_)
        if (std::abs(v) > tol) return false;
    return true;
}

Complex CoeffFn::eval(double s) const {
    if (!sampled_) {
        Complex acc = 0;
        for (const auto& t : terms_) acc += t.amp * std::exp(t.rate * s);
        return acc;
    }
    const auto& x = grid_->points();
    if (s <= x.front()) return values_.front();
    if (s >= x.back()) return values_.back();
    auto it = std::upper_bound(x.begin(), x.end(), s);
    size_t i = (size_t)(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i];
    const double u = (s - x[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    if (!d2_.empty()) {
        // quintic Hermite from (y, y', y'') at both ends; resolves the
        // steep e^{-c e^s} tails of the decaying modes on this grid
        const double u4 = u3 * u, u5 = u4 * u;
        const double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
        const double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
        const double H2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5);
        const double K0 = 10 * u3 - 15 * u4 + 6 * u5;
        const double K1 = -4 * u3 + 7 * u4 - 3 * u5;
        const double K2 = 0.5 * (u3 - 2 * u4 + u5);
        return H0 * values_[i] + H1 * h * d1_[i] + H2 * h * h * d2_[i] + K0 * values_[i + 1] +
               K1 * h * d1_[i + 1] + K2 * h * h * d2_[i + 1];
    }
    return (2 * u3 - 3 * u2 + 1) * values_[i] + (u3 - 2 * u2 + u) * h * d1_[i] +
           (-2 * u3 + 3 * u2) * values_[i + 1] + (u3 - u2) * h * d1_[i + 1];
}

CoeffFn CoeffFn::derivative() const {
    if (!sampled_) {
        CoeffFn f;
        for (const auto& t : terms_)
            if (t.rate != 0.0) f.terms_.push_back({t.amp * t.rate, t.rate});
        return f;
    }
    CoeffFn f;
    f.sampled_ = true;
    f.grid_ = grid_;
    f.values_ = d1_;
    f.d1_ = d2_.empty() ? stencil_derivative(grid_, d1_) : d2_;
    return f;
}

CoeffFn CoeffFn::scaled(Complex c) const {
    CoeffFn f = *this;
    if (!sampled_) {
        for (auto& t : f.terms_) t.amp *= c;
        return f;
    }
    for (auto& v : f.values_) v *= c;
    for (auto& v : f.d1_) v *= c;
    for (auto& v : f.d2_) v *= c;
    return f;
}

CoeffFn CoeffFn::shifted(double rate) const {
    if (rate == 0.0) return *this;
    if (!sampled_) {
        CoeffFn f = *this;
        for (auto& t : f.terms_) t.rate += rate;
        return f;
    }
    CoeffFn f;
    f.sampled_ = true;
    f.grid_ = grid_;
    const auto& x = grid_->points();
    const size_t n = x.size();
    f.values_.resize(n);
    f.d1_.resize(n);
    if (!d2_.empty()) f.d2_.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double w = std::exp(rate * x[i]);
        f.values_[i] = w * values_[i];
        f.d1_[i] = w * (d1_[i] + rate * values_[i]);
        if (!d2_.empty()) f.d2_[i] = w * (d2_[i] + 2 * rate * d1_[i] + rate * rate * values_[i]);
    }
    return f;
}

void CoeffFn::to_sampled(const GridPtr& grid) {
    if (sampled_) return;
    const auto& x = grid->points();
    std::vector<Complex> v(x.size()), d1(x.size()), d2(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        Complex a = 0, b = 0, c = 0;
        for (const auto& t : terms_) {
            const Complex e = t.amp * std::exp(t.rate * x[i]);
            a += e;
            b += t.rate * e;
            c += t.rate * t.rate * e;
        }
        v[i] = a;
        d1[i] = b;
        d2[i] = c;
    }
    *this = sampled(grid, std::move(v), std::move(d1), std::move(d2));
}

CoeffFn CoeffFn::operator+(const CoeffFn& other) const {
    if (!sampled_ && !other.sampled_) {
        CoeffFn f = *this;
        for (const auto& t : other.terms_) {
            bool merged = false;
            for (auto& mine : f.terms_) {
                if (mine.rate == t.rate) {
                    mine.amp += t.amp;
                    merged = true;
                    break;
                }
            }
            if (!merged) f.terms_.push_back(t);
        }
        std::erase_if(f.terms_, [](const ExpTerm& t) { return t.amp == Complex(0); });
        return f;
    }
    CoeffFn a = *this, b = other;
    GridPtr grid = sampled_ ? grid_ : other.grid_;
    a.to_sampled(grid);
    b.to_sampled(grid);
    if (a.grid_ != b.grid_) throw DomainError("mismatched coefficient grids");
    CoeffFn f;
    f.sampled_ = true;
    f.grid_ = grid;
    const size_t n = grid->size();
    f.values_.resize(n);
    f.d1_.resize(n);
    const bool both_d2 = !a.d2_.empty() && !b.d2_.empty();
    if (both_d2) f.d2_.resize(n);
    for (size_t i = 0; i < n; ++i) {
        f.values_[i] = a.values_[i] + b.values_[i];
        f.d1_[i] = a.d1_[i] + b.d1_[i];
        if (both_d2) f.d2_[i] = a.d2_[i] + b.d2_[i];
    }
    return f;
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

CuspModel CuspModel::real_cusp(int n, IntegerLattice cross, GridPtr grid) {
    if (n < 3) throw DomainError("real cusp needs n >= 3");
    if (cross.dim != n - 1) throw DomainError("cross-section lattice must have rank n-1");
    CuspModel m;
    m.kind = FieldKind::R;
    m.n = n;
    m.weights.assign(n - 1, 1);
    m.covolume = std::fabs(rat_mat_det(cross.basis).to_double());
    m.cross_lattice = std::move(cross);
    m.grid = grid ? grid : SGrid::make();
    return m;
}

CuspModel CuspModel::complex_cusp(int n, IntegerLattice horizontal, double fiber_length,
                                  GridPtr grid) {
    if (n < 2) throw DomainError("complex cusp needs n >= 2");
    if (horizontal.dim != 2 * n - 2)
        throw DomainError("horizontal lattice must have rank 2n-2");
    if (!(fiber_length > 0)) throw DomainError("fiber length must be positive");
    CuspModel m;
    m.kind = FieldKind::C;
    m.n = n;
    m.weights.assign(2 * n - 1, 1);
    m.weights[0] = 2;  // circle fiber
    m.covolume = std::fabs(rat_mat_det(horizontal.basis).to_double()) * fiber_length;
    m.cross_lattice = std::move(horizontal);
    m.fiber_length = fiber_length;
    m.grid = grid ? grid : SGrid::make();
    return m;
}

int CuspModel::weight_total() const {
    int c = 0;
    for (int w : weights) c += w;
    return c;
}

std::vector<double> CuspModel::dual_vector(const std::vector<long long>& coords) const {
    if ((int)coords.size() != cross_lattice.dim) throw DomainError("bad dual coordinate vector");
    IntegerLattice dual = dual_lattice(cross_lattice);
    const int d = dual.dim;
    std::vector<double> v(cross_dim(), 0.0);
    const int offset = cross_dim() - d;  // complex cusp: duals live on the horizontal block
    for (int j = 0; j < d; ++j) {
        double x = 0;
        for (int i = 0; i < d; ++i) x += (double)coords[i] * dual.basis[i][j].to_double();
        v[offset + j] = x;
    }
    return v;
}

// ---------------------------------------------------------------------------
// combinatorics
// ---------------------------------------------------------------------------

namespace {

int popcount(uint32_t m) { return std::popcount(m); }

// (-1)^{# set bits of mask below position j}
int insert_sign(int j, uint32_t mask) {
    return (popcount(mask & ((1u << j) - 1)) % 2 == 0) ? 1 : -1;
}

int weight_of(const CuspModel& model, uint32_t mask) {
    int w = 0;
    for (int i = 0; i < model.cross_dim(); ++i)
        if (mask & (1u << i)) w += model.weights[i];
    return w;
}

std::vector<uint32_t> masks_of_size(int dims, int k) {
    std::vector<uint32_t> out;
    if (k < 0 || k > dims) return out;
    for (uint32_t m = 0; m < (1u << dims); ++m)
        if (popcount(m) == k) out.push_back(m);
    return out;
}

}  // namespace

int star_sign(uint32_t full_mask, int total_dim) {
    // parity of the permutation (sorted A, sorted A^c) of (0..N-1):
    // inversions are pairs (a in A, b in A^c) with b < a
    int inv = 0;
    for (int a = 0; a < total_dim; ++a) {
        if (!(full_mask & (1u << a))) continue;
        for (int b = 0; b < a; ++b)
            if (!(full_mask & (1u << b))) ++inv;
    }
    return inv % 2 == 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// calculus
// ---------------------------------------------------------------------------

bool FormMode::is_zero_mode() const {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

double FormMode::v_norm() const {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

namespace {

void accumulate(std::map<uint32_t, CoeffFn>& dst, uint32_t key, const CoeffFn& f) {
    if (f.is_zero(0.0)) return;
    auto it = dst.find(key);
    if (it == dst.end())
        dst.emplace(key, f);
    else
        it->second = it->second + f;
}

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

CuspForm exterior_derivative(const CuspModel& model, const CuspForm& f) {
    if (f.degree >= model.total_dim()) throw DomainError("cannot differentiate a top-degree form");
    CuspForm out;
    out.degree = f.degree + 1;
    out.decay_tag = f.decay_tag;
    for (const auto& mode : f.modes) {
        FormMode m;
        m.v = mode.v;
        for (const auto& [I, a] : mode.tangential) {
            // tangential exterior derivative: multiplication by 2 pi i v_j
            for (int j = 0; j < model.cross_dim(); ++j) {
                if (I & (1u << j)) continue;
                if (mode.v[j] == 0.0) continue;
                accumulate(m.tangential, I | (1u << j),
                           a.scaled(kI * (kTwoPi * mode.v[j]) * (double)insert_sign(j, I)));
            }
            // s-derivative lands in the ds part
            accumulate(m.ds_part, I, a.derivative());
        }
        for (const auto& [J, b] : mode.ds_part) {
            // dt^j ^ ds ^ dt^J = -ds ^ dt^j ^ dt^J
            for (int j = 0; j < model.cross_dim(); ++j) {
                if (J & (1u << j)) continue;
                if (mode.v[j] == 0.0) continue;
                accumulate(m.ds_part, J | (1u << j),
                           b.scaled(-kI * (kTwoPi * mode.v[j]) * (double)insert_sign(j, J)));
            }
        }
        if (!m.tangential.empty() || !m.ds_part.empty()) out.modes.push_back(std::move(m));
    }
    return out;
}

CuspForm hodge_star(const CuspModel& model, const CuspForm& f) {
    CuspForm out;
    out.degree = model.total_dim() - f.degree;
    out.decay_tag = f.decay_tag;
    const int N = model.total_dim();
    const uint32_t cross_all = (1u << model.cross_dim()) - 1;
    const int w_all = model.weight_total();
    for (const auto& mode : f.modes) {
        FormMode m;
        m.v = mode.v;
        for (const auto& [I, a] : mode.tangential) {
            // *(dt^I) = eps e^{(W_I - W_{I^c}) s} ds ^ dt^{I^c}
            const uint32_t full = I << 1;
            const int eps = star_sign(full, N);
            const int wI = weight_of(model, I);
            accumulate(m.ds_part, cross_all & ~I,
                       a.scaled((double)eps).shifted(2 * wI - w_all));
        }
        for (const auto& [J, b] : mode.ds_part) {
            // *(ds ^ dt^J) = eps e^{(W_J - W_{J^c}) s} dt^{J^c}
            const uint32_t full = (J << 1) | 1u;
            const int eps = star_sign(full, N);
            const int wJ = weight_of(model, J);
            accumulate(m.tangential, cross_all & ~J,
                       b.scaled((double)eps).shifted(2 * wJ - w_all));
        }
        if (!m.tangential.empty() || !m.ds_part.empty()) out.modes.push_back(std::move(m));
    }
    return out;
}

CuspForm codifferential(const CuspModel& model, const CuspForm& f) {
    if (f.degree < 1) throw DomainError("codifferential needs degree >= 1");
    const int N = model.total_dim();
    const int k = f.degree;
    // d* = (-1)^{N(k+1)+1} * d * on k-forms
    const double sign = ((N * (k + 1) + 1) % 2 == 0) ? 1.0 : -1.0;
    CuspForm g = hodge_star(model, exterior_derivative(model, hodge_star(model, f)));
    return scale_form(g, sign);
}

CuspForm contract_coordinate(const CuspModel& model, const CuspForm& f, int direction) {
    if (direction < 0 || direction >= model.cross_dim()) throw DomainError("bad direction");
    CuspForm out;
    out.degree = f.degree - 1;
    out.decay_tag = f.decay_tag;
    const uint32_t bit = 1u << direction;
    for (const auto& mode : f.modes) {
        FormMode m;
        m.v = mode.v;
        for (const auto& [I, a] : mode.tangential)
            if (I & bit)
                accumulate(m.tangential, I & ~bit, a.scaled((double)insert_sign(direction, I & ~bit)));
        for (const auto& [J, b] : mode.ds_part)
            if (J & bit)
                accumulate(m.ds_part, J & ~bit, b.scaled(-(double)insert_sign(direction, J & ~bit)));
        if (!m.tangential.empty() || !m.ds_part.empty()) out.modes.push_back(std::move(m));
    }
    return out;
}

CuspForm contract_s(const CuspModel& /*model*/, const CuspForm& f) {
    CuspForm out;
    out.degree = f.degree - 1;
    out.decay_tag = f.decay_tag;
    for (const auto& mode : f.modes) {
        FormMode m;
        m.v = mode.v;
        for (const auto& [J, b] : mode.ds_part) accumulate(m.tangential, J, b);
        if (!m.tangential.empty()) out.modes.push_back(std::move(m));
    }
    return out;
}

CuspForm wedge_ds(const CuspModel& /*model*/, const CuspForm& f) {
    CuspForm out;
    out.degree = f.degree + 1;
    out.decay_tag = f.decay_tag;
    for (const auto& mode : f.modes) {
        FormMode m;
        m.v = mode.v;
        for (const auto& [I, a] : mode.tangential) accumulate(m.ds_part, I, a);
        if (!m.ds_part.empty()) out.modes.push_back(std::move(m));
    }
    return out;
}

CuspForm scale_form(const CuspForm& f, Complex c) {
    CuspForm out = f;
    for (auto& mode : out.modes) {
        for (auto& [I, a] : mode.tangential) a = a.scaled(c);
        for (auto& [J, b] : mode.ds_part) b = b.scaled(c);
    }
    return out;
}

CuspForm add_forms(const CuspForm& a, const CuspForm& b) {
    if (a.degree != b.degree) throw DomainError("cannot add forms of different degree");
    CuspForm out = a;
    out.decay_tag = a.decay_tag && b.decay_tag;
    out.harmonic_flag = false;
    for (const auto& mode : b.modes) {
        FormMode* target = nullptr;
        for (auto& m : out.modes)
            if (m.v == mode.v) { target = &m; break; }
        if (!target) {
            out.modes.push_back(mode);
            continue;
        }
        for (const auto& [I, c] : mode.tangential) accumulate(target->tangential, I, c);
        for (const auto& [J, c] : mode.ds_part) accumulate(target->ds_part, J, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// norms
// ---------------------------------------------------------------------------

namespace {

double mode_pw2(const CuspModel& model, const FormMode& mode, double s, bool tangential_part,
                bool ds_part) {
    double acc = 0;
    if (tangential_part)
        for (const auto& [I, a] : mode.tangential) {
            const double w = std::exp(2.0 * weight_of(model, I) * s);
            acc += std::norm(a.eval(s)) * w;
        }
    if (ds_part)
        for (const auto& [J, b] : mode.ds_part) {
            const double w = std::exp(2.0 * weight_of(model, J) * s);
            acc += std::norm(b.eval(s)) * w;
        }
    return acc;
}

}  // namespace

double pointwise_norm_sq(const CuspModel& model, const CuspForm& f, double s) {
    double acc = 0;
    for (const auto& mode : f.modes) acc += mode_pw2(model, mode, s, true, true);
    return acc;
}

double slice_norm_sq(const CuspModel& model, const CuspForm& f, double s) {
    return model.covolume * std::exp(-model.weight_total() * s) * pointwise_norm_sq(model, f, s);
}

double slice_ds_norm_sq(const CuspModel& model, const CuspForm& f, double s) {
    double acc = 0;
    for (const auto& mode : f.modes) acc += mode_pw2(model, mode, s, false, true);
    return model.covolume * std::exp(-model.weight_total() * s) * acc;
}

double slice_dir_norm_sq(const CuspModel& model, const CuspForm& f, int direction, double s) {
    CuspForm g = contract_coordinate(model, f, direction);
    return std::exp(2.0 * model.weights[direction] * s) * slice_norm_sq(model, g, s);
}

double slice_inner(const CuspModel& model, const CuspForm& f, const CuspForm& g, double s) {
    double acc = 0;
    for (const auto& mf : f.modes)
        for (const auto& mg : g.modes) {
            if (mf.v != mg.v) continue;
            for (const auto& [I, a] : mf.tangential) {
                auto it = mg.tangential.find(I);
                if (it == mg.tangential.end()) continue;
                acc += std::real(a.eval(s) * std::conj(it->second.eval(s))) *
                       std::exp(2.0 * weight_of(model, I) * s);
            }
            for (const auto& [J, b] : mf.ds_part) {
                auto it = mg.ds_part.find(J);
                if (it == mg.ds_part.end()) continue;
                acc += std::real(b.eval(s) * std::conj(it->second.eval(s))) *
                       std::exp(2.0 * weight_of(model, J) * s);
            }
        }
    return model.covolume * std::exp(-model.weight_total() * s) * acc;
}

double mu_alpha(const CuspModel& model, const CuspForm& f, double s) {
    const double total = slice_norm_sq(model, f, s);
    if (total <= 0) throw DomainError("mu undefined where the form vanishes");
    return slice_ds_norm_sq(model, f, s) / total;
}

namespace {

bool mode_is_exp_sum(const FormMode& mode) {
    for (const auto& [I, a] : mode.tangential)
        if (!a.is_exp_sum()) return false;
    for (const auto& [J, b] : mode.ds_part)
        if (!b.is_exp_sum()) return false;
    return true;
}

// analytic slab integral of one exp-sum coefficient's density contribution
double exp_density_integral(const CoeffFn& c, double weight_rate, double u, double K, double scale) {
    // |c(s)|^2 e^{weight_rate s}: collect exponents
    std::map<double, double> by_rate;
    const auto& terms = c.exp_terms();
    for (const auto& t1 : terms)
        for (const auto& t2 : terms) {
            const double rho = t1.rate + t2.rate + weight_rate;
            by_rate[rho] += std::real(t1.amp * std::conj(t2.amp));
        }
    double acc = 0;
    for (const auto& [rho, coef] : by_rate) {
        if (std::fabs(coef) < 1e-300) continue;
        if (K == kInfHeight) {
            if (rho >= -1e-12) {
                if (std::fabs(coef) > 1e-13 * std::max(scale, 1.0))
                    throw DivergenceError("slab integral diverges at infinity");
                continue;
            }
            acc += coef * (-std::exp(rho * u) / rho);
        } else {
            acc += (rho == 0.0) ? coef * (K - u)
                                : coef * (std::exp(rho * K) - std::exp(rho * u)) / rho;
        }
    }
    return acc;
}

}  // namespace

double slab_l2_norm(const CuspModel& model, const CuspForm& f, double u, double K) {
    if (K != kInfHeight && !(u < K)) throw DomainError("slab needs u < K");
    if (u < 0) throw DomainError("slab start must be >= 0");
    const int w_all = model.weight_total();
    double total = 0;
    for (const auto& mode : f.modes) {
        if (mode_is_exp_sum(mode)) {
            double scale = 0;
            for (const auto& [I, a] : mode.tangential)
                for (const auto& t : a.exp_terms()) scale = std::max(scale, std::norm(t.amp));
            for (const auto& [J, b] : mode.ds_part)
                for (const auto& t : b.exp_terms()) scale = std::max(scale, std::norm(t.amp));
            double acc = 0;
            for (const auto& [I, a] : mode.tangential)
                acc += exp_density_integral(a, 2.0 * weight_of(model, I) - w_all, u, K, scale);
            for (const auto& [J, b] : mode.ds_part)
                acc += exp_density_integral(b, 2.0 * weight_of(model, J) - w_all, u, K, scale);
            total += model.covolume * acc;
        } else {
            // sampled mode: integrate numerically; beyond the grid the
            // coefficients of decay-tagged forms are identically zero
            if (K == kInfHeight && !f.decay_tag)
                throw DivergenceError("infinite slab needs a decay tag on sampled forms");
            if (K != kInfHeight && K > model.grid->back() + 1e-12)
                throw DomainError("slab extends beyond the sample grid");
            const double hi = (K == kInfHeight) ? model.grid->back() : std::min(K, model.grid->back());
            CuspForm single;
            single.degree = f.degree;
            single.modes.push_back(mode);
            if (u < hi)
                total += integrate(
                    [&](double s) { return slice_norm_sq(model, single, s); }, u, hi, 1e-10, 1e-300);
        }
    }
    return total;
}

double relative_residual(const CuspModel& model, const CuspForm& g, const CuspForm& f) {
    double sup_g = 0, sup_f = 0;
    for (double s : model.grid->points()) {
        sup_g = std::max(sup_g, std::sqrt(pointwise_norm_sq(model, g, s)));
        sup_f = std::max(sup_f, std::sqrt(pointwise_norm_sq(model, f, s)));
    }
    return sup_f > 0 ? sup_g / sup_f : sup_g;
}

double harmonicity_residual(const CuspModel& model, const CuspForm& f) {
    double r = relative_residual(model, exterior_derivative(model, f), f);
    if (f.degree >= 1) r = std::max(r, relative_residual(model, codifferential(model, f), f));
    return r;
}

// ---------------------------------------------------------------------------
// constructions
// ---------------------------------------------------------------------------

CuspForm make_zero_mode(const CuspModel& model, const std::vector<double>& a_coeffs,
                        const std::vector<double>& b_coeffs) {
    if (model.kind != FieldKind::R) throw DomainError("zero mode construction is for real cusps");
    const int n = model.n;
    if (n % 2 == 0) throw DomainError("critical degree needs odd n");
    const int k = (n - 1) / 2;
    auto t_masks = masks_of_size(model.cross_dim(), k);
    auto d_masks = masks_of_size(model.cross_dim(), k - 1);
    if (a_coeffs.size() != t_masks.size() || b_coeffs.size() != d_masks.size())
        throw DomainError("zero mode coefficient counts do not match the index sets");

    CuspForm f;
    f.degree = k;
    FormMode m;
    m.v.assign(model.cross_dim(), 0.0);
    for (size_t i = 0; i < t_masks.size(); ++i)
        if (a_coeffs[i] != 0.0)
            m.tangential.emplace(t_masks[i], CoeffFn::exponential(a_coeffs[i], 0.0));
    // the coclosedness constraint fixes the ds-part profile e^{+2s}
    for (size_t i = 0; i < d_masks.size(); ++i)
        if (b_coeffs[i] != 0.0)
            m.ds_part.emplace(d_masks[i], CoeffFn::exponential(b_coeffs[i], 2.0));
    f.modes.push_back(std::move(m));
    f.harmonic_flag = true;
    return f;
}

namespace {

// orthonormal completion of a unit vector within the index block [lo, hi)
std::vector<std::vector<double>> complete_orthonormal(const std::vector<double>& unit, int lo,
                                                      int hi) {
    const int dim = (int)unit.size();
    std::vector<std::vector<double>> rows;
    rows.push_back(unit);
    for (int seed = lo; seed < hi && (int)rows.size() < hi - lo; ++seed) {
        std::vector<double> cand(dim, 0.0);
        cand[seed] = 1.0;
        for (const auto& r : rows) {
            double dot = 0;
            for (int i = 0; i < dim; ++i) dot += cand[i] * r[i];
            for (int i = 0; i < dim; ++i) cand[i] -= dot * r[i];
        }
        double norm = 0;
        for (double x : cand) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 1e-9) {
            for (double& x : cand) x /= norm;
            rows.push_back(std::move(cand));
        }
    }
    return rows;
}

double det_minor(const std::vector<std::vector<double>>& rows, const std::vector<int>& row_ids,
                 const std::vector<int>& col_ids) {
    const int m = (int)row_ids.size();
    if (m == 0) return 1.0;
    std::vector<std::vector<double>> a(m, std::vector<double>(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a[i][j] = rows[row_ids[i]][col_ids[j]];
    // Gaussian elimination with partial pivoting
    double det = 1.0;
    for (int c = 0; c < m; ++c) {
        int p = c;
        for (int r = c + 1; r < m; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        if (std::fabs(a[p][c]) < 1e-300) return 0.0;
        if (p != c) {
            std::swap(a[p], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (int r = c + 1; r < m; ++r) {
            const double q = a[r][c] / a[c][c];
            for (int j = c; j < m; ++j) a[r][j] -= q * a[c][j];
        }
    }
    return det;
}

std::vector<int> mask_to_indices(uint32_t mask, int dims) {
    std::vector<int> out;
    for (int i = 0; i < dims; ++i)
        if (mask & (1u << i)) out.push_back(i);
    return out;
}

struct ModeSolveResult {
    std::vector<double> s;   // descending during integration, later reversed
    std::vector<double> A, B, Ap, Bp;
};

// backward Dormand-Prince on the reduced 2x2 system
ModeSolveResult integrate_mode_backward(double lambda_freq, double P, double C, int c_e,
                                        double s_top) {
    const double twopl = kTwoPi * lambda_freq;
    auto rhs = [&](double s, double A, double B, double& dA, double& dB) {
        dA = twopl * B;
        dB = P * B + C * std::exp(2.0 * c_e * s) * A;
    };
    // frozen-coefficient decaying eigenvector at s_top
    const double G = C * std::exp(2.0 * c_e * s_top);
    const double mu = 0.5 * (P - std::sqrt(P * P + 4.0 * twopl * G));
    double A = twopl, B = mu;
    const double nrm = std::hypot(A, B);
    A /= nrm;
    B /= nrm;

    ModeSolveResult out;
    double s = s_top;
    double h = -1e-4;
    const double tol = 1e-11;
    double dA, dB;
    rhs(s, A, B, dA, dB);
    out.s.push_back(s);
    out.A.push_back(A);
    out.B.push_back(B);
    out.Ap.push_back(dA);
    out.Bp.push_back(dB);

    const double kC2[7] = {0, 0.2, 0.3, 0.8, 8.0 / 9, 1.0, 1.0};
    const double kA2[7][6] = {
        {},
        {0.2},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    const double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    const double b4[7] = {5179.0 / 57600, 0,           7571.0 / 16695, 393.0 / 640,
                          -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    int guard = 0;
    while (s > 0) {
        if (++guard > 3000000) throw SolverFailure("mode integration failed to advance");
        if (s + h < 0) h = -s;
        if (h > -1e-15) break;
        h = std::max(h, -0.01);
        double kA_[7], kB_[7];
        kA_[0] = out.Ap.back();
        kB_[0] = out.Bp.back();
        for (int i = 1; i < 7; ++i) {
            double Ai = A, Bi = B;
            for (int j = 0; j < i; ++j) {
                Ai += h * kA2[i][j] * kA_[j];
                Bi += h * kA2[i][j] * kB_[j];
            }
            rhs(s + kC2[i] * h, Ai, Bi, kA_[i], kB_[i]);
        }
        double A5 = A, B5 = B, A4 = A, B4 = B;
        for (int i = 0; i < 7; ++i) {
            A5 += h * b5[i] * kA_[i];
            B5 += h * b5[i] * kB_[i];
            A4 += h * b4[i] * kA_[i];
            B4 += h * b4[i] * kB_[i];
        }
        const double sc = 1e-30 + tol * std::max({std::fabs(A), std::fabs(B), std::fabs(A5),
                                                  std::fabs(B5)});
        const double err = std::max(std::fabs(A5 - A4), std::fabs(B5 - B4)) / sc;
        if (err <= 1.0) {
            s += h;
            A = A5;
            B = B5;
            rhs(s, A, B, dA, dB);
            out.s.push_back(s);
            out.A.push_back(A);
            out.B.push_back(B);
            out.Ap.push_back(dA);
            out.Bp.push_back(dB);
        }
        const double fac = std::clamp(0.9 * std::pow(err > 0 ? 1.0 / err : 1e8, 0.2), 0.2, 5.0);
        h = std::max(h * fac, -0.01);
        if (std::fabs(h) < 1e-15) throw SolverFailure("step-size underflow in mode solve");
    }
    return out;
}

double hermite_eval(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<double>& ds, double x) {
    // xs descending (backward integration order)
    size_t lo = 0, hi = xs.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (xs[mid] >= x)
            lo = mid;
        else
            hi = mid;
    }
    const double h = xs[hi] - xs[lo];
    const double u = (x - xs[lo]) / h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * ys[lo] + (u3 - 2 * u2 + u) * h * ds[lo] +
           (-2 * u3 + 3 * u2) * ys[hi] + (u3 - u2) * h * ds[hi];
}

}  // namespace

CuspForm solve_harmonic_mode(const CuspModel& model, int k, const std::vector<double>& v,
                             HarmonicModeDiagnostics* diag) {
    if ((int)v.size() != model.cross_dim()) throw DomainError("mode vector has wrong dimension");
    bool zero = true;
    for (double x : v)
        if (x != 0.0) zero = false;
    if (zero) throw DomainError("nonzero Fourier mode required (zero mode has its own builder)");
    if (k == 0)
        throw SolverFailure("no closed and coclosed L2 mode exists in degree 0");
    if (model.kind == FieldKind::R) {
        if (k < 1 || 2 * k > model.n - 1)
            throw DomainError("real-cusp mode solver needs 1 <= k <= (n-1)/2");
    } else {
        if (k < 1 || k >= model.n) throw DomainError("complex-cusp mode solver needs 1 <= k < n");
    }

    // choose the rotated orthonormal frame: u^0 along the mode, then k-1
    // weight-one directions, then the rest
    const int cross = model.cross_dim();
    int block_lo = 0, block_hi = cross;
    int c_e = 1;
    if (model.kind == FieldKind::C) {
        const bool fiber_part = v[0] != 0.0;
        bool horiz_part = false;
        for (int i = 1; i < cross; ++i)
            if (v[i] != 0.0) horiz_part = true;
        if (fiber_part && horiz_part)
            throw SolverFailure("mixed fiber/horizontal modes are not supported");
        if (fiber_part) {
            c_e = 2;
            block_lo = 0;
            block_hi = 1;
        } else {
            block_lo = 1;
        }
    }
    double lambda = 0;
    for (double x : v) lambda += x * x;
    lambda = std::sqrt(lambda);

    std::vector<double> unit(cross, 0.0);
    for (int i = 0; i < cross; ++i) unit[i] = v[i] / lambda;
    // rows: mode direction, then the orthonormal completion of its block,
    // then all directions outside the block
    std::vector<std::vector<double>> rows = complete_orthonormal(unit, block_lo, block_hi);
    for (int i = 0; i < cross; ++i) {
        if (i >= block_lo && i < block_hi) continue;
        std::vector<double> axis(cross, 0.0);
        axis[i] = 1.0;
        rows.push_back(std::move(axis));
    }
    if ((int)rows.size() != cross) throw SolverFailure("could not complete the mode frame");

    // rotated weights: row 0 has weight c_e, block rows weight 1 (real) or
    // the block weight, outside rows keep their own weight
    std::vector<int> rot_w(cross, 1);
    rot_w[0] = c_e;
    {
        int r = block_hi - block_lo;  // rows 0..r-1 from the block
        for (int i = r; i < cross; ++i) {
            // locate the axis this row came from
            int axis = -1;
            for (int j = 0; j < cross; ++j)
                if (rows[i][j] == 1.0) axis = j;
            rot_w[i] = model.weights[axis < 0 ? 0 : axis];
        }
    }

    // Q = rotated rows 1..k-1; all must have weight one
    if (k - 1 > cross - 1) throw DomainError("degree too large for the cross section");
    int W_Q = 0;
    for (int i = 1; i < k; ++i) {
        if (rot_w[i] != 1) throw SolverFailure("cannot pick a weight-one coframe for Q");
        W_Q += rot_w[i];
    }
    int W_Z = 0;
    for (int i = k; i < cross; ++i) W_Z += rot_w[i];

    // reduced system  A' = 2 pi lambda B,
    //                 B' = P B + C e^{2 c_e s} A
    uint32_t maskEQ = 0, maskQ = 0;
    for (int i = 0; i < k; ++i) maskEQ |= 1u << i;
    for (int i = 1; i < k; ++i) maskQ |= 1u << i;
    const int N = model.total_dim();
    const int eps1 = star_sign(maskEQ << 1, N);
    const int eps2 = star_sign((maskQ << 1) | 1u, N);
    const double coupling = -(double)(eps1) / (double)(eps2);  // sigma = +1: e is first
    if (!(coupling > 0))
        throw SolverFailure("reduced mode system has no decaying solution (coupling <= 0)");
    const double P = c_e + W_Z - W_Q;
    const double C = coupling * kTwoPi * lambda;

    const double s_top =
        std::min(model.grid->back(), std::log1p(400.0 * c_e / (kTwoPi * lambda)) / c_e);
    ModeSolveResult sol = integrate_mode_backward(lambda, P, C, c_e, s_top);

    // rescale to O(1) before building samples (backward growth is huge)
    double mx = 0;
    for (size_t i = 0; i < sol.A.size(); ++i)
        mx = std::max({mx, std::fabs(sol.A[i]), std::fabs(sol.B[i])});
    if (!(mx > 0) || !std::isfinite(mx)) throw SolverFailure("mode solve produced no solution");
    for (size_t i = 0; i < sol.A.size(); ++i) {
        sol.A[i] /= mx;
        sol.B[i] /= mx;
        sol.Ap[i] /= mx;
        sol.Bp[i] /= mx;
    }

    // sample A, B on the model grid (zero beyond s_top)
    const auto& gs = model.grid->points();
    const size_t ng = gs.size();
    std::vector<double> As(ng, 0), Bs(ng, 0), Aps(ng, 0), Bps(ng, 0), Apps(ng, 0), Bpps(ng, 0);
    const double twopl = kTwoPi * lambda;
    for (size_t i = 0; i < ng; ++i) {
        const double s = gs[i];
        if (s > s_top) break;
        As[i] = hermite_eval(sol.s, sol.A, sol.Ap, s);
        Bs[i] = hermite_eval(sol.s, sol.B, sol.Bp, s);
        Aps[i] = twopl * Bs[i];
        Bps[i] = P * Bs[i] + C * std::exp(2.0 * c_e * s) * As[i];
        Apps[i] = twopl * Bps[i];
        Bpps[i] = P * Bps[i] + C * std::exp(2.0 * c_e * s) * (2.0 * c_e * As[i] + Aps[i]);
    }

    auto coeff_from = [&](const std::vector<double>& y, const std::vector<double>& d1,
                          const std::vector<double>& d2, Complex scale) {
        std::vector<Complex> vv(ng), dd1(ng), dd2(ng);
        for (size_t i = 0; i < ng; ++i) {
            vv[i] = scale * y[i];
            dd1[i] = scale * d1[i];
            dd2[i] = scale * d2[i];
        }
        return CoeffFn::sampled(model.grid, std::move(vv), std::move(dd1), std::move(dd2));
    };

    // expand u^0 ^ u^Q and u^Q into coordinate multi-indices
    CuspForm f;
    f.degree = k;
    f.decay_tag = true;
    FormMode m;
    m.v = v;
    std::vector<int> rows_eq(k), rows_q(k - 1);
    for (int i = 0; i < k; ++i) rows_eq[i] = i;
    for (int i = 1; i < k; ++i) rows_q[i - 1] = i;
    for (uint32_t I : masks_of_size(cross, k)) {
        const double minor = det_minor(rows, rows_eq, mask_to_indices(I, cross));
        if (std::fabs(minor) < 1e-14) continue;
        m.tangential.emplace(I, coeff_from(As, Aps, Apps, kI * minor));
    }
    for (uint32_t J : masks_of_size(cross, k - 1)) {
        const double minor = det_minor(rows, rows_q, mask_to_indices(J, cross));
        if (std::fabs(minor) < 1e-14) continue;
        m.ds_part.emplace(J, coeff_from(Bs, Bps, Bpps, Complex(minor)));
    }
    f.modes.push_back(std::move(m));

    const double norm = slab_l2_norm(model, f, 0.0, kInfHeight);
    if (!(norm > 0)) throw SolverFailure("mode solve produced a null form");
    f = scale_form(f, 1.0 / std::sqrt(norm));
    f.decay_tag = true;
    f.harmonic_flag = true;

    const double res = harmonicity_residual(model, f);
    if (diag) {
        diag->lambda = twopl;
        diag->s_top = s_top;
        diag->coupling = coupling;
        diag->residual = res;
    }
    if (res > 1e-8)
        throw SolverFailure("harmonicity residual " + std::to_string(res) + " above tolerance");
    return f;
}

CuspForm fourier_primitive(const CuspModel& model, const CuspForm& h) {
    if (h.modes.size() != 1 || h.modes.front().is_zero_mode())
        throw DomainError("Fourier primitive needs a single nonzero mode");
    const auto& v = h.modes.front().v;
    double v2 = 0;
    for (double x : v) v2 += x * x;
    CuspForm out;
    out.degree = h.degree - 1;
    out.decay_tag = h.decay_tag;
    for (size_t j = 0; j < v.size(); ++j) {
        if (v[j] == 0.0) continue;
        CuspForm cj = contract_coordinate(model, h, (int)j);
        cj = scale_form(cj, v[j] / (kTwoPi * kI * v2));
        out = out.modes.empty() ? cj : add_forms(out, cj);
    }
    return out;
}

// ---------------------------------------------------------------------------
// balance verification
// ---------------------------------------------------------------------------

CuspBalanceReport verify_cusp_balance(const CuspModel& model, const CuspForm& f, double u) {
    if (!f.harmonic_flag) throw DomainError("balance verification needs a harmonic form");
    if (u < 0) throw DomainError("u must be >= 0");
    slab_l2_norm(model, f, 0.0, kInfHeight);  // L2 precondition; throws on divergence
    CuspBalanceReport rep;
    const double hi = model.grid->back();

    auto slab_of = [&](const std::function<double(double)>& g, double lo) {
        return integrate(g, lo, hi, 1e-10, 1e-300);
    };

    const double slice_u = slice_norm_sq(model, f, u);
    const double slice_ds_u = slice_ds_norm_sq(model, f, u);
    rep.boundary = 0.5 * slice_u - slice_ds_u;

    if (model.kind == FieldKind::R) {
        const double lead = 0.5 * (model.n - 1) - f.degree;
        rep.bulk = slab_of(
            [&](double s) {
                return lead * slice_norm_sq(model, f, s) + slice_ds_norm_sq(model, f, s);
            },
            u);
    } else {
        const double lead = model.n - f.degree;
        rep.bulk = slab_of(
            [&](double s) {
                return lead * slice_norm_sq(model, f, s) + slice_ds_norm_sq(model, f, s) -
                       slice_dir_norm_sq(model, f, 0, s);
            },
            u);
    }
    rep.residual = std::fabs(rep.boundary - rep.bulk) /
                   std::max({std::fabs(rep.boundary), std::fabs(rep.bulk), 1e-300});

    // boundary functional monotone in u
    double prev = rep.boundary;
    for (double du = 0.25; du <= 2.0; du += 0.25) {
        const double su = u + du;
        if (su > hi) break;
        const double val = 0.5 * slice_norm_sq(model, f, su) - slice_ds_norm_sq(model, f, su);
        if (val > prev * (1 + 1e-9) + 1e-12) rep.boundary_monotone = false;
        prev = val;
    }

    // mu over the sampled heights where the form has mass
    double slice_max = 0;
    for (double s : model.grid->points())
        slice_max = std::max(slice_max, slice_norm_sq(model, f, s));
    for (double s : model.grid->points()) {
        if (s < u) continue;
        const double sl = slice_norm_sq(model, f, s);
        if (sl < 1e-20 * slice_max) continue;
        rep.mu_max = std::max(rep.mu_max, slice_ds_norm_sq(model, f, s) / sl);
    }

    if (model.kind == FieldKind::R && model.n == 2 * f.degree + 1) {
        const double delta = successive_minima(model.cross_lattice).delta;
        const double lhs = slab_of(
            [&](double s) { return std::exp(s - u) * slice_norm_sq(model, f, s); }, u);
        const double rhs =
            (1.0 + std::exp(-u) / (kTwoPi * delta)) * slab_of(
                [&](double s) { return slice_norm_sq(model, f, s); }, u);
        rep.critical_margin = (rhs - lhs) / std::max(rhs, 1e-300);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string CuspForm::to_json(const CuspModel& model) const {
    nlohmann::json j;
    j["kind"] = to_string(model.kind);
    j["n"] = model.n;
    j["degree"] = degree;
    j["modes"] = nlohmann::json::array();
    for (const auto& mode : modes) {
        nlohmann::json jm;
        jm["v"] = mode.v;
        jm["coeffs"] = nlohmann::json::array();
        auto emit = [&](const std::map<uint32_t, CoeffFn>& part, const std::string& name) {
            for (const auto& [mask, c] : part) {
                nlohmann::json jc;
                jc["part"] = name;
                jc["index"] = mask_to_indices(mask, model.cross_dim());
                if (c.is_exp_sum()) {
                    nlohmann::json terms = nlohmann::json::array();
                    for (const auto& t : c.exp_terms())
                        terms.push_back({{"re", t.amp.real()}, {"im", t.amp.imag()},
                                         {"rate", t.rate}});
                    jc["closedForm"] = terms;
                } else {
                    nlohmann::json samples = nlohmann::json::array();
                    for (const auto& x : c.samples())
                        samples.push_back({x.real(), x.imag()});
                    jc["samples"] = samples;
                }
                jm["coeffs"].push_back(jc);
            }
        };
        emit(mode.tangential, "tangential");
        emit(mode.ds_part, "ds");
        j["modes"].push_back(jm);
    }
    j["grid"] = model.grid->points();
    return j.dump();
}

}  // namespace rankone
