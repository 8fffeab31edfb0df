#pragma once

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rankone/lattice.hpp"
#include "rankone/space.hpp"

namespace rankone {

using Complex = std::complex<double>;

// Shared grid of s-samples on [0, s_max]; mildly geometric so that the
// spacing is finest near s = 0 where the mass of decaying modes lives.
class SGrid {
public:
    static std::shared_ptr<const SGrid> make(double s_max = 12.0, int count = 2048,
                                             double stretch = 2.0);
    const std::vector<double>& points() const { return s_; }
    double back() const { return s_.back(); }
    size_t size() const { return s_.size(); }

private:
    std::vector<double> s_;
};

using GridPtr = std::shared_ptr<const SGrid>;

// Coefficient function of the cusp parameter s. Either an exact sum of
// complex exponentials amp * e^{rate s} (closed under the exterior
// calculus) or samples on the shared grid with stored derivatives.
class CoeffFn {
public:
    CoeffFn() = default;  // zero

    static CoeffFn exponential(Complex amp, double rate);
    static CoeffFn sampled(GridPtr grid, std::vector<Complex> values,
                           std::vector<Complex> d1 = {}, std::vector<Complex> d2 = {});

    bool is_exp_sum() const { return !sampled_; }
    bool is_zero(double tol = 0.0) const;

    Complex eval(double s) const;
    CoeffFn derivative() const;
    CoeffFn scaled(Complex c) const;
    CoeffFn shifted(double rate) const;  // multiply by e^{rate s}
    CoeffFn operator+(const CoeffFn& other) const;

    struct ExpTerm {
        Complex amp;
        double rate;
    };
    const std::vector<ExpTerm>& exp_terms() const { return terms_; }
    const GridPtr& grid() const { return grid_; }
    const std::vector<Complex>& samples() const { return values_; }

private:
    // exp-sum representation
    std::vector<ExpTerm> terms_;
    // sampled representation
    bool sampled_ = false;
    GridPtr grid_;
    std::vector<Complex> values_;
    std::vector<Complex> d1_;
    std::vector<Complex> d2_;

    void to_sampled(const GridPtr& grid);
    friend CoeffFn merge_sampled(const CoeffFn& a, const CoeffFn& b);
};

// Model cusp [0, infty) x cross-section. The metric is
//   ds^2 + sum_i e^{-2 c_i s} (dt^i)^2
// in flat coordinates t on the cross section; the real cusp has all
// weights c_i = 1, the complex cusp has weight 2 on the circle fiber
// (direction 0) and 1 on the 2n-2 horizontal directions.
struct CuspModel {
    FieldKind kind;
    int n;
    std::vector<int> weights;     // c_i per cross direction
    double covolume;              // cross-section volume at s = 0
    IntegerLattice cross_lattice; // real: rank n-1; complex: horizontal part
    double fiber_length = 0;      // complex only
    GridPtr grid;

    static CuspModel real_cusp(int n, IntegerLattice cross, GridPtr grid = nullptr);
    static CuspModel complex_cusp(int n, IntegerLattice horizontal, double fiber_length,
                                  GridPtr grid = nullptr);

    int cross_dim() const { return (int)weights.size(); }
    int total_dim() const { return cross_dim() + 1; }
    int weight_total() const;  // volume decay rate of cross sections

    // Fourier covector of a dual-lattice coordinate vector (real cusp).
    std::vector<double> dual_vector(const std::vector<long long>& coords) const;
};

// Differential form on the cusp, as a finite sum of Fourier modes. Per
// mode the coefficients are split into the tangential part (dt^I) and the
// ds part (ds ^ dt^J); multi-indices are bitmasks over cross directions.
struct FormMode {
    std::vector<double> v;                    // Fourier covector; all-zero = zero mode
    std::map<uint32_t, CoeffFn> tangential;   // |I| = degree
    std::map<uint32_t, CoeffFn> ds_part;      // |J| = degree - 1

    bool is_zero_mode() const;
    double v_norm() const;
};

struct CuspForm {
    int degree = 0;
    std::vector<FormMode> modes;
    bool harmonic_flag = false;
    bool decay_tag = false;

    std::string to_json(const CuspModel& model) const;
};

// --- exterior calculus -------------------------------------------------

CuspForm exterior_derivative(const CuspModel& model, const CuspForm& f);
CuspForm codifferential(const CuspModel& model, const CuspForm& f);
CuspForm hodge_star(const CuspModel& model, const CuspForm& f);
CuspForm contract_coordinate(const CuspModel& model, const CuspForm& f, int direction);
CuspForm contract_s(const CuspModel& model, const CuspForm& f);
CuspForm wedge_ds(const CuspModel& model, const CuspForm& f);
CuspForm scale_form(const CuspForm& f, Complex c);
CuspForm add_forms(const CuspForm& a, const CuspForm& b);

// sign of *theta^A = eps(A) theta^{A^c} in the orthonormal frame,
// full_mask over {0..N-1} with 0 the s direction
int star_sign(uint32_t full_mask, int total_dim);

// --- norms and slices ----------------------------------------------------

// pointwise |f|^2 at height s (no covolume or volume-weight factor)
double pointwise_norm_sq(const CuspModel& model, const CuspForm& f, double s);
// int_{T_s} |f|^2 dsigma
double slice_norm_sq(const CuspModel& model, const CuspForm& f, double s);
// same for i_{ds-dual} f (the ds part): int_{T_s} |i_{d/ds} f|^2 dsigma
double slice_ds_norm_sq(const CuspModel& model, const CuspForm& f, double s);
// contraction with the unit vector along cross direction j
double slice_dir_norm_sq(const CuspModel& model, const CuspForm& f, int direction, double s);
// Hermitian slice pairing Re int_{T_s} <f, g> dsigma (matching components)
double slice_inner(const CuspModel& model, const CuspForm& f, const CuspForm& g, double s);

double mu_alpha(const CuspModel& model, const CuspForm& f, double s);

constexpr double kInfHeight = -1.0;  // sentinel for K = infinity
double slab_l2_norm(const CuspModel& model, const CuspForm& f, double u, double K);

// sup over grid samples of pointwise |g| / sup of pointwise |f|
double relative_residual(const CuspModel& model, const CuspForm& g, const CuspForm& f);
// max of the d- and d*-residuals
double harmonicity_residual(const CuspModel& model, const CuspForm& f);

// --- constructions -------------------------------------------------------

// Harmonic zero mode in the critical degree k = (n-1)/2 of the real cusp:
// constant tangential coefficients a_I, ds-part coefficients b_J e^{2s}
// (the profile that makes the mode coclosed as well as closed). The total
// form is L2 iff all coefficients vanish.
CuspForm make_zero_mode(const CuspModel& model, const std::vector<double>& a_coeffs,
                        const std::vector<double>& b_coeffs);

struct HarmonicModeDiagnostics {
    double lambda = 0;          // 2 pi |v| scaled frequency
    double s_top = 0;           // backward-integration start
    double coupling = 0;        // coupling sign/strength in the reduced ODE
    double residual = 0;        // harmonicity residual after normalization
};

// L2 harmonic single-mode k-form via backward integration of the reduced
// (A, B) system, seeded from the decaying frozen-coefficient eigenvector
// and normalized to unit L2 norm on the full cusp. Real cusps accept any
// nonzero dual vector; complex cusps accept pure-fiber or pure-horizontal
// modes. Degrees 1 <= k <= (n-1)/2 (real), 1 <= k < n (complex).
CuspForm solve_harmonic_mode(const CuspModel& model, int k, const std::vector<double>& v,
                             HarmonicModeDiagnostics* diag = nullptr);

// Fourier primitive b^v with d b^v = h^v for a single nonzero mode.
CuspForm fourier_primitive(const CuspModel& model, const CuspForm& h);

// --- verification --------------------------------------------------------

struct CuspBalanceReport {
    double boundary = 0;        // int_{T_u} (1/2 - mu)|f|^2
    double bulk = 0;            // matching slab integral
    double residual = 0;        // relative defect of the identity
    bool boundary_monotone = true;
    double mu_max = 0;          // max of mu over sampled heights >= u
    // critical degree only: margins of the e^{s-R0} inequality at R0 = u
    std::optional<double> critical_margin;
};

CuspBalanceReport verify_cusp_balance(const CuspModel& model, const CuspForm& f, double u);

}  // namespace rankone
