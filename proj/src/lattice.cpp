#include "rankone/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rankone/errors.hpp"

namespace rankone {

RatMat rat_mat_mul(const RatMat& a, const RatMat& b) {
    const size_t n = a.size(), m = b[0].size(), p = b.size();
    RatMat c(n, RatVec(m, Rational(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < p; ++k)
            for (size_t j = 0; j < m; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

RatMat rat_mat_transpose(const RatMat& a) {
    RatMat t(a[0].size(), RatVec(a.size(), Rational(0)));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

RatMat rat_mat_inverse(const RatMat& a) {
    const size_t n = a.size();
    RatMat m = a;
    RatMat inv(n, RatVec(n, Rational(0)));
    for (size_t i = 0; i < n; ++i) inv[i][i] = Rational(1);
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        while (pivot < n && m[pivot][col] == Rational(0)) ++pivot;
        if (pivot == n) throw DomainError("singular basis: lattice is degenerate");
        std::swap(m[pivot], m[col]);
        std::swap(inv[pivot], inv[col]);
        Rational p = m[col][col];
        for (size_t j = 0; j < n; ++j) {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for (size_t row = 0; row < n; ++row) {
            if (row == col || m[row][col] == Rational(0)) continue;
            Rational f = m[row][col];
            for (size_t j = 0; j < n; ++j) {
                m[row][j] -= f * m[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

Rational rat_mat_det(const RatMat& a) {
    const size_t n = a.size();
    RatMat m = a;
    Rational det(1);
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        while (pivot < n && m[pivot][col] == Rational(0)) ++pivot;
        if (pivot == n) return Rational(0);
        if (pivot != col) {
            std::swap(m[pivot], m[col]);
            det = -det;
        }
        det *= m[col][col];
        Rational p = m[col][col];
        for (size_t row = col + 1; row < n; ++row) {
            if (m[row][col] == Rational(0)) continue;
            Rational f = m[row][col] / p;
            for (size_t j = col; j < n; ++j) m[row][j] -= f * m[col][j];
        }
    }
    return det;
}

IntegerLattice IntegerLattice::from_basis(RatMat basis_rows) {
    IntegerLattice L;
    L.dim = (int)basis_rows.size();
    if (L.dim == 0) throw DomainError("empty lattice basis");
    for (const auto& row : basis_rows)
        if ((int)row.size() != L.dim)
            throw DomainError("lattice basis must be square (full-rank translations)");
    L.basis = std::move(basis_rows);
    L.gram = rat_mat_mul(L.basis, rat_mat_transpose(L.basis));
    if (rat_mat_det(L.basis) == Rational(0))
        throw DomainError("singular basis: lattice is degenerate");
    return L;
}

IntegerLattice IntegerLattice::parse(std::istream& in) {
    RatMat rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        RatVec row;
        std::string tok;
        while (ls >> tok) {
            if (tok[0] == '#') break;
            row.push_back(Rational::parse(tok));
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DomainError("no basis rows found");
    return from_basis(std::move(rows));
}

IntegerLattice IntegerLattice::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open lattice file: " + path);
    return parse(in);
}

void IntegerLattice::emit(std::ostream& out) const {
    for (const auto& row : basis) {
        for (size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j].str();
        out << "\n";
    }
}

IntegerLattice IntegerLattice::scaled(const Rational& c) const {
    RatMat b = basis;
    for (auto& row : b)
        for (auto& x : row) x *= c;
    return from_basis(std::move(b));
}

Rational IntegerLattice::norm_sq(const std::vector<long long>& coords) const {
    Rational s(0);
    for (int i = 0; i < dim; ++i) {
        if (coords[i] == 0) continue;
        for (int j = 0; j < dim; ++j) {
            if (coords[j] == 0) continue;
            s += gram[i][j] * Rational(coords[i]) * Rational(coords[j]);
        }
    }
    return s;
}

IntegerLattice dual_lattice(const IntegerLattice& L) {
    return IntegerLattice::from_basis(rat_mat_transpose(rat_mat_inverse(L.basis)));
}

namespace {

// LLL (delta = 3/4) on the Gram matrix. The unimodular transform U and the
// Gram updates are exact (integer row operations on rationals); only the
// Gram-Schmidt bookkeeping runs in long double. Reduction quality feeds the
// enumeration radius and nothing else, so float GSO does not compromise the
// exactness of any downstream result.
struct GramLLL {
    int d;
    RatMat G;                 // current Gram, exact
    std::vector<std::vector<long long>> U;

    explicit GramLLL(const RatMat& gram) : d((int)gram.size()), G(gram) {
        U.assign(d, std::vector<long long>(d, 0));
        for (int i = 0; i < d; ++i) U[i][i] = 1;
    }

    void gso(std::vector<std::vector<long double>>& mu, std::vector<long double>& B) const {
        mu.assign(d, std::vector<long double>(d, 0));
        B.assign(d, 0);
        std::vector<std::vector<long double>> r(d, std::vector<long double>(d, 0));
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= i; ++j) {
                long double s = (long double)G[i][j].to_double();
                for (int k = 0; k < j; ++k) s -= mu[j][k] * r[i][k];
                r[i][j] = s;
                if (j < i) mu[i][j] = s / B[j];
            }
            B[i] = r[i][i];
            if (!(B[i] > 0)) throw DomainError("Gram matrix is not positive definite");
        }
    }

    void swap_rows(int i, int j) {
        std::swap(G[i], G[j]);
        for (int k = 0; k < d; ++k) std::swap(G[k][i], G[k][j]);
        std::swap(U[i], U[j]);
    }

    void row_op_exact(int i, int j, long long c) {
        Rational rc(c);
        // G[i][i] update must use pre-update off-diagonals
        Rational gii = G[i][i] - rc * G[i][j] - rc * G[j][i] + rc * rc * G[j][j];
        for (int k2 = 0; k2 < d; ++k2)
            if (k2 != i) G[i][k2] -= rc * G[j][k2];
        for (int k2 = 0; k2 < d; ++k2)
            if (k2 != i) G[k2][i] = G[i][k2];
        G[i][i] = gii;
        for (int k2 = 0; k2 < d; ++k2) U[i][k2] -= c * U[j][k2];
    }

    void reduce() {
        int k = 1;
        std::vector<std::vector<long double>> mu;
        std::vector<long double> B;
        gso(mu, B);
        int guard = 0;
        while (k < d) {
            if (++guard > 100000) throw NumericError("LLL failed to terminate");
            for (int j = k - 1; j >= 0; --j) {
                const long long c = (long long)llroundl(mu[k][j]);
                if (c != 0) {
                    row_op_exact(k, j, c);
                    gso(mu, B);
                }
            }
            if (B[k] >= (0.75L - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1] * (1 - 1e-15L)) {
                ++k;
            } else {
                swap_rows(k, k - 1);
                gso(mu, B);
                k = std::max(k - 1, 1);
            }
        }
    }
};

struct EnumContext {
    int d;
    const RatMat* gram;                 // exact Gram of the enumeration basis
    std::vector<std::vector<double>> R; // Cholesky factor of Gram (doubles)
    double r_sq_slack;                  // float pruning radius^2 (with slack)
    Rational r_sq_exact;
    long long budget;
    long long nodes = 0;
};

void cholesky(const RatMat& G, std::vector<std::vector<double>>& R) {
    const int d = (int)G.size();
    R.assign(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double s = G[i][j].to_double();
            for (int k = 0; k < i; ++k) s -= R[k][i] * R[k][j];
            if (i == j) {
                if (s <= 0) throw DomainError("Gram matrix is not positive definite");
                R[i][i] = std::sqrt(s);
            } else {
                R[i][j] = s / R[i][i];
            }
        }
    }
}

Rational norm_sq_in(const RatMat& G, const std::vector<long long>& x) {
    Rational s(0);
    const int d = (int)G.size();
    for (int i = 0; i < d; ++i) {
        if (x[i] == 0) continue;
        for (int j = 0; j < d; ++j) {
            if (x[j] == 0) continue;
            s += G[i][j] * Rational(x[i]) * Rational(x[j]);
        }
    }
    return s;
}

// Schnorr-Euchner style depth-first enumeration of all x with
// x^T G x <= r_sq (exact acceptance test). Emits one representative per
// +-x pair: the first nonzero coordinate from the top level is positive.
void enumerate_impl(EnumContext& ctx,
                    const std::function<void(const std::vector<long long>&, const Rational&)>& emit) {
    const int d = ctx.d;
    if (ctx.r_sq_exact < Rational(0)) return;
    std::vector<long long> x(d, 0);
    std::vector<double> center(d, 0.0);     // offset at each level
    std::vector<double> partial(d + 1, 0.0);  // partial squared norm below level
    std::vector<long long> lo(d, 0), hi(d, 0);

    // iterative DFS over levels d-1 .. 0
    int level = d - 1;
    const double rr = ctx.r_sq_slack;

    // compute center and bounds when entering a level
    auto enter = [&](int i) {
        double c = 0;
        for (int j = i + 1; j < d; ++j) c += ctx.R[i][j] * (double)x[j];
        c /= ctx.R[i][i];
        center[i] = -c;
        double rem = rr - partial[i + 1];
        if (rem < 0) rem = 0;
        double radius = std::sqrt(rem) / ctx.R[i][i];
        lo[i] = (long long)std::ceil(center[i] - radius - 1e-9);
        hi[i] = (long long)std::floor(center[i] + radius + 1e-9);
        if (i == d - 1) lo[i] = std::max(lo[i], 0LL);  // sign canonicalization at top
        x[i] = lo[i] - 1;  // will be incremented on first visit
    };

    enter(level);
    while (level < d) {
        if (++ctx.nodes > ctx.budget)
            throw BudgetExceededError("lattice enumeration exceeded node budget", 0);
        ++x[level];
        if (x[level] > hi[level]) {
            ++level;  // backtrack
            continue;
        }
        double t = ctx.R[level][level] * ((double)x[level] - center[level]);
        double p = partial[level + 1] + t * t;
        if (p > rr) continue;  // float prune (slack already applied)
        if (level == 0) {
            // exact acceptance
            Rational nsq = norm_sq_in(*ctx.gram, x);
            if (nsq <= ctx.r_sq_exact) {
                // canonical sign: topmost nonzero coordinate positive; at the
                // top level we only walked x >= 0, so only the x_top == 0
                // subtree can produce mirror pairs
                bool is_zero = true;
                int top_nonzero = -1;
                for (int i = d - 1; i >= 0; --i)
                    if (x[i] != 0) { top_nonzero = i; is_zero = false; break; }
                if (is_zero || x[top_nonzero] > 0) emit(x, nsq);
            }
            continue;
        }
        partial[level] = p;
        --level;
        enter(level);
    }
}

struct ReducedView {
    IntegerLattice lat;                        // LLL-reduced copy
    std::vector<std::vector<long long>> U;     // reduced = U * original
};

ReducedView reduce_lattice(const IntegerLattice& L) {
    GramLLL lll(L.gram);
    lll.reduce();
    RatMat rb(L.dim, RatVec(L.dim, Rational(0)));
    for (int i = 0; i < L.dim; ++i)
        for (int j = 0; j < L.dim; ++j)
            for (int k = 0; k < L.dim; ++k) rb[i][j] += Rational(lll.U[i][k]) * L.basis[k][j];
    ReducedView v{IntegerLattice::from_basis(std::move(rb)), lll.U};
    return v;
}

std::vector<long long> to_original_coords(const std::vector<std::vector<long long>>& U,
                                          const std::vector<long long>& x) {
    const int d = (int)U.size();
    std::vector<long long> y(d, 0);
    for (int i = 0; i < d; ++i)
        if (x[i] != 0)
            for (int j = 0; j < d; ++j) y[j] += x[i] * U[i][j];
    return y;
}

std::vector<long long> canonical_sign(std::vector<long long> v) {
    for (long long c : v) {
        if (c > 0) break;
        if (c < 0) {
            for (auto& e : v) e = -e;
            break;
        }
    }
    // pick the lexicographically smaller of +-v
    std::vector<long long> neg(v.size());
    for (size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    return std::min(v, neg);
}

}  // namespace

std::vector<std::pair<std::vector<long long>, Rational>> enumerate_up_to(
    const IntegerLattice& L, const Rational& r_sq, long long node_budget) {
    ReducedView rv = reduce_lattice(L);
    EnumContext ctx;
    ctx.d = L.dim;
    ctx.gram = &rv.lat.gram;
    cholesky(rv.lat.gram, ctx.R);
    ctx.r_sq_exact = r_sq;
    ctx.r_sq_slack = r_sq.to_double() * (1 + 1e-9) + 1e-9;
    ctx.budget = node_budget;

    std::vector<std::pair<std::vector<long long>, Rational>> out;
    enumerate_impl(ctx, [&](const std::vector<long long>& x, const Rational& nsq) {
        std::vector<long long> orig = to_original_coords(rv.U, x);
        out.emplace_back(canonical_sign(std::move(orig)), nsq);
    });
    return out;
}

SuccessiveMinima successive_minima(const IntegerLattice& L, long long node_budget) {
    ReducedView rv = reduce_lattice(L);
    // The reduced basis vectors are d independent vectors, so every
    // successive minimum is <= their largest norm; that radius is enough.
    Rational r_sq(0);
    for (int i = 0; i < L.dim; ++i)
        if (rv.lat.gram[i][i] > r_sq) r_sq = rv.lat.gram[i][i];

    auto cands = enumerate_up_to(L, r_sq, node_budget);
    // drop the origin
    std::vector<std::pair<std::vector<long long>, Rational>> vecs;
    for (auto& c : cands) {
        bool zero = true;
        for (long long e : c.first)
            if (e != 0) { zero = false; break; }
        if (!zero) vecs.push_back(std::move(c));
    }
    std::sort(vecs.begin(), vecs.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });

    SuccessiveMinima out;
    // greedy independent selection over rationals
    RatMat rows;  // row-echelon accumulator
    auto try_add = [&](const RatVec& v) -> bool {
        RatVec w = v;
        for (const auto& r : rows) {
            int p = 0;
            while (p < (int)r.size() && r[p] == Rational(0)) ++p;
            if (p < (int)w.size() && w[p] != Rational(0)) {
                Rational f = w[p] / r[p];
                for (size_t j = 0; j < w.size(); ++j) w[j] -= f * r[j];
            }
        }
        bool nonzero = false;
        for (const auto& e : w)
            if (e != Rational(0)) { nonzero = true; break; }
        if (nonzero) {
            // normalize leading entry position for stable elimination
            rows.push_back(w);
            std::sort(rows.begin(), rows.end(), [](const RatVec& a, const RatVec& b) {
                int pa = 0, pb = 0;
                while (pa < (int)a.size() && a[pa] == Rational(0)) ++pa;
                while (pb < (int)b.size() && b[pb] == Rational(0)) ++pb;
                return pa < pb;
            });
        }
        return nonzero;
    };

    for (const auto& [coords, nsq] : vecs) {
        if ((int)out.witnesses.size() == L.dim) break;
        RatVec vec(L.dim, Rational(0));
        for (int j = 0; j < L.dim; ++j)
            for (int i = 0; i < L.dim; ++i) vec[j] += Rational(coords[i]) * L.basis[i][j];
        if (try_add(vec)) {
            out.witnesses.push_back(coords);
            out.minima_sq.push_back(nsq);
            out.minima.push_back(std::sqrt(nsq.to_double()));
        }
    }
    if ((int)out.witnesses.size() != L.dim)
        throw NumericError("enumeration failed to find a full independent set");

    IntegerLattice dual = dual_lattice(L);
    ReducedView dv = reduce_lattice(dual);
    Rational dual_r_sq = dv.lat.gram[0][0];
    for (int i = 1; i < dual.dim; ++i)
        if (dv.lat.gram[i][i] < dual_r_sq) dual_r_sq = dv.lat.gram[i][i];
    auto dual_vecs = enumerate_up_to(dual, dual_r_sq, node_budget);
    Rational best = dual_r_sq;
    bool found = false;
    for (const auto& [coords, nsq] : dual_vecs) {
        bool zero = true;
        for (long long e : coords)
            if (e != 0) { zero = false; break; }
        if (zero) continue;
        if (!found || nsq < best) { best = nsq; found = true; }
    }
    if (!found) throw NumericError("dual enumeration found no nonzero vector");
    out.delta_sq = best;
    out.delta = std::sqrt(best.to_double());
    return out;
}

long long count_points_in_ball(const IntegerLattice& L, double R, long long node_budget) {
    if (!(R > 0)) throw DomainError("counting radius must be positive");
    // one dyadic conversion of R^2 (squaring the converted R would need a
    // denominator beyond int64)
    Rational r_sq = Rational::from_double_exact(R * R);
    long long count = 0;
    try {
        auto vecs = enumerate_up_to(L, r_sq, node_budget);
        for (const auto& [coords, nsq] : vecs) {
            bool zero = true;
            for (long long e : coords)
                if (e != 0) { zero = false; break; }
            count += zero ? 1 : 2;  // enumeration emits one of each +-v pair
        }
    } catch (const BudgetExceededError&) {
        throw BudgetExceededError("point counting exceeded node budget", count);
    }
    return count;
}

NboundReport nbound_check(const IntegerLattice& L, int nu, double R, int ambient_dim,
                          long long node_budget) {
    if (nu < 0) throw DomainError("nu must be nonnegative");
    if (!(R > 0)) throw DomainError("R must be positive");
    const int n = ambient_dim;
    if (L.dim != n - 1)
        throw DomainError("cross-section lattice rank must equal ambient dimension minus one");

    SuccessiveMinima sm = successive_minima(L, node_budget);
    NboundReport rep;
    rep.lambda1 = sm.minima.front();
    rep.lambda_top = sm.minima.back();
    if (!(std::exp(nu + 1.0) * R < rep.lambda_top))
        throw DomainError("hypothesis e^{nu+1} R < lambda_{n-1} fails for this lattice");

    const double radius = std::exp((double)nu) * R;
    rep.count = count_points_in_ball(L, radius, node_budget);
    rep.bound = std::pow(2.0, n - 2) * std::pow(rep.lambda1, 2 - n) *
                std::pow(radius + rep.lambda1 / 2.0, n - 2);
    rep.satisfied = (double)rep.count <= rep.bound;
    return rep;
}

}  // namespace rankone
