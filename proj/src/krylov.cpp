#include "nows/krylov.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace nows {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void split_triangles(const CsrMatrix& A, CsrMatrix& lower, CsrMatrix& upper,
                     std::vector<double>& diag) {
    const int n = A.nrows;
    lower.nrows = lower.ncols = n;
    upper.nrows = upper.ncols = n;
    lower.row_offsets.assign(n + 1, 0);
    upper.row_offsets.assign(n + 1, 0);
    diag.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            int j = A.col_indices[k];
            if (j < i)
                lower.row_offsets[i + 1]++;
            else if (j > i)
                upper.row_offsets[i + 1]++;
            else
                diag[i] = A.values[k];
        }
    for (int i = 0; i < n; ++i) {
        lower.row_offsets[i + 1] += lower.row_offsets[i];
        upper.row_offsets[i + 1] += upper.row_offsets[i];
    }
    lower.col_indices.resize(lower.row_offsets[n]);
    lower.values.resize(lower.row_offsets[n]);
    upper.col_indices.resize(upper.row_offsets[n]);
    upper.values.resize(upper.row_offsets[n]);
    std::vector<int> lc(lower.row_offsets.begin(), lower.row_offsets.end() - 1);
    std::vector<int> uc(upper.row_offsets.begin(), upper.row_offsets.end() - 1);
    for (int i = 0; i < n; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            int j = A.col_indices[k];
            if (j < i) {
                lower.col_indices[lc[i]] = j;
                lower.values[lc[i]++] = A.values[k];
            } else if (j > i) {
                upper.col_indices[uc[i]] = j;
                upper.values[uc[i]++] = A.values[k];
            }
        }
}

CsrMatrix ic0_factor(const CsrMatrix& A) {
    if (!is_symmetric(A, 1e-12))
        throw std::invalid_argument("make_preconditioner: ic0 requires symmetric A");
    const int n = A.nrows;
    // L has the lower-triangular pattern of A (diagonal included).
    CsrMatrix L;
    L.nrows = L.ncols = n;
    L.row_offsets.assign(n + 1, 0);
    for (int i = 0; i < n; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            if (A.col_indices[k] <= i) L.row_offsets[i + 1]++;
    for (int i = 0; i < n; ++i) L.row_offsets[i + 1] += L.row_offsets[i];
    L.col_indices.resize(L.row_offsets[n]);
    L.values.assign(L.row_offsets[n], 0.0);
    {
        std::vector<int> c(L.row_offsets.begin(), L.row_offsets.end() - 1);
        for (int i = 0; i < n; ++i)
            for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
                if (A.col_indices[k] <= i) {
                    L.col_indices[c[i]] = A.col_indices[k];
                    L.values[c[i]++] = A.values[k];
                }
    }
    // Row-oriented incomplete Cholesky: entries only on the kept pattern.
    auto row_dot = [&](int a, int b, int upto) {
        // sum_{j < upto} L[a][j] * L[b][j], sparse merge over sorted columns
        double s = 0.0;
        int ka = L.row_offsets[a], kb = L.row_offsets[b];
        int ea = L.row_offsets[a + 1], eb = L.row_offsets[b + 1];
        while (ka < ea && kb < eb) {
            int ca = L.col_indices[ka], cb = L.col_indices[kb];
            if (ca >= upto || cb >= upto) break;
            if (ca == cb) {
                s += L.values[ka] * L.values[kb];
                ++ka;
                ++kb;
            } else if (ca < cb) {
                ++ka;
            } else {
                ++kb;
            }
        }
        return s;
    };
    std::vector<double> Ldiag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = L.row_offsets[i]; k < L.row_offsets[i + 1]; ++k) {
            int j = L.col_indices[k];
            if (j < i) {
                double v = (L.values[k] - row_dot(i, j, j)) / Ldiag[j];
                L.values[k] = v;
            } else {
                double d = L.values[k] - row_dot(i, i, i);
                if (d <= 0.0)
                    throw std::runtime_error(
                        "make_preconditioner: ic0 breakdown (non-positive pivot)");
                L.values[k] = std::sqrt(d);
                Ldiag[i] = L.values[k];
            }
        }
        if (Ldiag[i] == 0.0)
            throw std::runtime_error("make_preconditioner: ic0 missing diagonal");
    }
    return L;
}

void ilu0_factor(const CsrMatrix& A, CsrMatrix& L, CsrMatrix& U) {
    const int n = A.nrows;
    // Work on a copy of A's entries in place (pattern is preserved).
    CsrMatrix F = A;
    std::vector<int> diag_pos(n, -1);
    for (int i = 0; i < n; ++i)
        for (int k = F.row_offsets[i]; k < F.row_offsets[i + 1]; ++k)
            if (F.col_indices[k] == i) diag_pos[i] = k;
    for (int i = 0; i < n; ++i)
        if (diag_pos[i] < 0)
            throw std::runtime_error("make_preconditioner: ilu0 zero diagonal");

    std::vector<int> colmap(n, -1);
    for (int i = 0; i < n; ++i) {
        for (int k = F.row_offsets[i]; k < F.row_offsets[i + 1]; ++k)
            colmap[F.col_indices[k]] = k;
        for (int k = F.row_offsets[i]; k < F.row_offsets[i + 1]; ++k) {
            int kk = F.col_indices[k];
            if (kk >= i) break;
            double ukk = F.values[diag_pos[kk]];
            if (ukk == 0.0)
                throw std::runtime_error("make_preconditioner: ilu0 zero pivot");
            double lik = F.values[k] / ukk;
            F.values[k] = lik;
            for (int kj = diag_pos[kk] + 1; kj < F.row_offsets[kk + 1]; ++kj) {
                int j = F.col_indices[kj];
                int pos = colmap[j];
                if (pos >= 0) F.values[pos] -= lik * F.values[kj];
            }
        }
        if (F.values[diag_pos[i]] == 0.0)
            throw std::runtime_error("make_preconditioner: ilu0 zero pivot");
        for (int k = F.row_offsets[i]; k < F.row_offsets[i + 1]; ++k)
            colmap[F.col_indices[k]] = -1;
    }
    // Split into unit-lower L (strict part stored) and upper U with diagonal.
    CsrMatrix upper;
    std::vector<double> dummy;
    split_triangles(F, L, upper, dummy);
    // U = strict upper + diagonal of F.
    U.nrows = U.ncols = n;
    U.row_offsets.assign(n + 1, 0);
    for (int i = 0; i < n; ++i)
        U.row_offsets[i + 1] =
            upper.row_offsets[i + 1] - upper.row_offsets[i] + 1;
    for (int i = 0; i < n; ++i) U.row_offsets[i + 1] += U.row_offsets[i];
    U.col_indices.resize(U.row_offsets[n]);
    U.values.resize(U.row_offsets[n]);
    for (int i = 0; i < n; ++i) {
        int pos = U.row_offsets[i];
        U.col_indices[pos] = i;
        U.values[pos] = F.values[diag_pos[i]];
        ++pos;
        for (int k = upper.row_offsets[i]; k < upper.row_offsets[i + 1]; ++k) {
            U.col_indices[pos] = upper.col_indices[k];
            U.values[pos] = upper.values[k];
            ++pos;
        }
    }
}

}  // namespace

void KrylovOpts::check() const {
    if (rel_tol <= 0.0 && abs_tol <= 0.0)
        throw std::invalid_argument("KrylovOpts: rel_tol > 0 or abs_tol > 0 required");
    if (max_iters < 0) throw std::invalid_argument("KrylovOpts: max_iters >= 0");
    if (restart < 1) throw std::invalid_argument("KrylovOpts: restart >= 1");
}

double KrylovOpts::target(double b_norm) const {
    double t = 0.0;
    if (rel_tol > 0.0) t = rel_tol * b_norm;
    if (abs_tol > 0.0) t = std::max(t, abs_tol);
    return t;
}

const char* precond_name(PrecondKind k) {
    switch (k) {
        case PrecondKind::none: return "none";
        case PrecondKind::jacobi: return "jacobi";
        case PrecondKind::ssor: return "ssor";
        case PrecondKind::ic0: return "ic0";
        case PrecondKind::ilu0: return "ilu0";
    }
    return "?";
}

PrecondKind precond_from_name(const std::string& name) {
    if (name == "none") return PrecondKind::none;
    if (name == "jacobi") return PrecondKind::jacobi;
    if (name == "ssor") return PrecondKind::ssor;
    if (name == "ic0" || name == "icc") return PrecondKind::ic0;
    if (name == "ilu0" || name == "ilu") return PrecondKind::ilu0;
    throw std::invalid_argument("unknown preconditioner: " + name);
}

Preconditioner make_preconditioner(const CsrMatrix& A, PrecondKind kind,
                                   double omega) {
    if (A.nrows != A.ncols)
        throw std::invalid_argument("make_preconditioner: matrix must be square");
    Preconditioner P;
    P.kind_ = kind;
    P.omega_ = omega;
    P.n_ = A.nrows;
    switch (kind) {
        case PrecondKind::none:
            break;
        case PrecondKind::jacobi: {
            P.diag_.resize(A.nrows);
            for (int i = 0; i < A.nrows; ++i) {
                double d = A.at(i, i);
                if (d == 0.0)
                    throw std::runtime_error("make_preconditioner: jacobi zero diagonal");
                P.diag_[i] = 1.0 / d;
            }
            break;
        }
        case PrecondKind::ssor: {
            if (!(omega > 0.0 && omega < 2.0))
                throw std::invalid_argument("make_preconditioner: ssor needs 0 < omega < 2");
            split_triangles(A, P.lower_, P.upper_, P.diag_);
            for (double d : P.diag_)
                if (d == 0.0)
                    throw std::runtime_error("make_preconditioner: ssor zero diagonal");
            break;
        }
        case PrecondKind::ic0: {
            P.lower_ = ic0_factor(A);
            P.lower_t_ = csr_transpose(P.lower_);
            break;
        }
        case PrecondKind::ilu0: {
            ilu0_factor(A, P.lower_, P.upper_);
            P.lower_t_ = CsrMatrix{};
            break;
        }
    }
    return P;
}

void Preconditioner::apply(std::span<const double> r, std::span<double> z) const {
    const int n = static_cast<int>(r.size());
    if (kind_ != PrecondKind::none && n != n_)
        throw std::invalid_argument("Preconditioner::apply: size mismatch");
    switch (kind_) {
        case PrecondKind::none:
            std::memcpy(z.data(), r.data(), sizeof(double) * n);
            return;
        case PrecondKind::jacobi:
            for (int i = 0; i < n; ++i) z[i] = r[i] * diag_[i];
            return;
        case PrecondKind::ssor: {
            // z = (2-w)/w * (D/w + U)^-1 D (D/w + L)^-1 r
            std::vector<double> t(n);
            for (int i = 0; i < n; ++i) {
                double acc = r[i];
                for (int k = lower_.row_offsets[i]; k < lower_.row_offsets[i + 1]; ++k)
                    acc -= lower_.values[k] * t[lower_.col_indices[k]];
                t[i] = acc * omega_ / diag_[i];
            }
            for (int i = 0; i < n; ++i) t[i] *= diag_[i];
            for (int i = n - 1; i >= 0; --i) {
                double acc = t[i];
                for (int k = upper_.row_offsets[i]; k < upper_.row_offsets[i + 1]; ++k)
                    acc -= upper_.values[k] * z[upper_.col_indices[k]];
                z[i] = acc * omega_ / diag_[i];
            }
            double s = (2.0 - omega_) / omega_;
            for (int i = 0; i < n; ++i) z[i] *= s;
            return;
        }
        case PrecondKind::ic0: {
            // Forward solve L y = r, then backward solve L^T z = y.
            std::vector<double> y(n);
            for (int i = 0; i < n; ++i) {
                double acc = r[i];
                double d = 0.0;
                for (int k = lower_.row_offsets[i]; k < lower_.row_offsets[i + 1]; ++k) {
                    int j = lower_.col_indices[k];
                    if (j < i)
                        acc -= lower_.values[k] * y[j];
                    else
                        d = lower_.values[k];
                }
                y[i] = acc / d;
            }
            // lower_t_ holds L^T as CSR (upper triangular).
            for (int i = n - 1; i >= 0; --i) {
                double acc = y[i];
                double d = 0.0;
                for (int k = lower_t_.row_offsets[i]; k < lower_t_.row_offsets[i + 1]; ++k) {
                    int j = lower_t_.col_indices[k];
                    if (j > i)
                        acc -= lower_t_.values[k] * z[j];
                    else
                        d = lower_t_.values[k];
                }
                z[i] = acc / d;
            }
            return;
        }
        case PrecondKind::ilu0: {
            // (I + L) y = r, then U z = y.
            std::vector<double> y(n);
            for (int i = 0; i < n; ++i) {
                double acc = r[i];
                for (int k = lower_.row_offsets[i]; k < lower_.row_offsets[i + 1]; ++k)
                    acc -= lower_.values[k] * y[lower_.col_indices[k]];
                y[i] = acc;
            }
            for (int i = n - 1; i >= 0; --i) {
                double acc = y[i];
                double d = 0.0;
                for (int k = upper_.row_offsets[i]; k < upper_.row_offsets[i + 1]; ++k) {
                    int j = upper_.col_indices[k];
                    if (j == i)
                        d = upper_.values[k];
                    else
                        acc -= upper_.values[k] * z[j];
                }
                z[i] = acc / d;
            }
            return;
        }
    }
}

std::vector<double> Preconditioner::apply(std::span<const double> r) const {
    std::vector<double> z(r.size());
    apply(r, z);
    return z;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double t : v) s += t * t;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

SolveResult cg_solve(const CsrMatrix& A, std::span<const double> b,
                     std::span<const double> x0, const Preconditioner& M,
                     const KrylovOpts& opts) {
    opts.check();
    if (A.nrows != A.ncols)
        throw std::invalid_argument("cg_solve: matrix must be square");
    if (b.size() != static_cast<size_t>(A.nrows) || x0.size() != b.size())
        throw std::invalid_argument("cg_solve: dimension mismatch");
    auto t_wall = clock_type::now();
    const int n = A.nrows;

    SolveResult res;
    res.x.assign(x0.begin(), x0.end());
    const double target = opts.target(norm2(b));

    std::vector<double> r(n), z(n), p(n), Ap(n), rtrue(n);
    spmv_into(A, res.x, Ap);
    for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    double rn = norm2(r);
    if (opts.record_trace) res.residual_trace.push_back(rn);
    if (rn <= target) {
        res.converged = true;
        res.wall_time = seconds_since(t_wall);
        return res;
    }

    M.apply(r, z);
    p = z;
    double rz = dot(r, z);

    auto t_core = clock_type::now();
    for (int m = 1; m <= opts.max_iters; ++m) {
        spmv_into(A, p, Ap);
        double pAp = dot(p, Ap);
        if (!(pAp > 0.0) || rz == 0.0) {
            // Indefinite or broken-down system; report non-convergence.
            res.iterations = m - 1;
            break;
        }
        double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) res.x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];

        // True residual, recomputed so traces are comparable across
        // preconditioners and initializers.
        spmv_into(A, res.x, rtrue);
        for (int i = 0; i < n; ++i) rtrue[i] = b[i] - rtrue[i];
        rn = norm2(rtrue);
        if (opts.record_trace) res.residual_trace.push_back(rn);
        res.iterations = m;
        if (rn <= target) {
            res.converged = true;
            break;
        }

        M.apply(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.core_time = seconds_since(t_core);
    res.wall_time = seconds_since(t_wall);
    return res;
}

SolveResult gmres_solve(const CsrMatrix& A, std::span<const double> b,
                        std::span<const double> x0, const Preconditioner& M,
                        const KrylovOpts& opts) {
    opts.check();
    if (A.nrows != A.ncols)
        throw std::invalid_argument("gmres_solve: matrix must be square");
    if (b.size() != static_cast<size_t>(A.nrows) || x0.size() != b.size())
        throw std::invalid_argument("gmres_solve: dimension mismatch");
    auto t_wall = clock_type::now();
    const int n = A.nrows;
    const int k = opts.restart;

    SolveResult res;
    res.x.assign(x0.begin(), x0.end());
    const double target = opts.target(norm2(b));

    std::vector<double> r(n), w(n), tmp(n);
    spmv_into(A, res.x, w);
    for (int i = 0; i < n; ++i) r[i] = b[i] - w[i];
    double rn = norm2(r);
    if (opts.record_trace) res.residual_trace.push_back(rn);
    if (rn <= target) {
        res.converged = true;
        res.wall_time = seconds_since(t_wall);
        return res;
    }

    std::vector<std::vector<double>> V, Z;
    std::vector<std::vector<double>> H;  // column j: length j+2
    std::vector<double> cs(k), sn(k), g(k + 1);

    auto t_core = clock_type::now();
    int total = 0;
    while (total < opts.max_iters && !res.converged) {
        // Start (or restart) a cycle from the current iterate.
        spmv_into(A, res.x, w);
        for (int i = 0; i < n; ++i) r[i] = b[i] - w[i];
        double beta = norm2(r);
        if (beta <= target) {
            res.converged = true;
            break;
        }
        V.assign(1, std::vector<double>(n));
        Z.clear();
        H.clear();
        for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        std::vector<double> y;
        std::vector<double> x_cycle = res.x;
        for (int j = 0; j < k && total < opts.max_iters; ++j) {
            Z.push_back(M.apply(V[j]));
            spmv_into(A, Z[j], w);
            H.emplace_back(j + 2, 0.0);
            for (int i = 0; i <= j; ++i) {
                double h = dot(w, V[i]);
                H[j][i] = h;
                for (int t = 0; t < n; ++t) w[t] -= h * V[i][t];
            }
            double hlast = norm2(w);
            H[j][j + 1] = hlast;

            for (int i = 0; i < j; ++i) {
                double t1 = cs[i] * H[j][i] + sn[i] * H[j][i + 1];
                double t2 = -sn[i] * H[j][i] + cs[i] * H[j][i + 1];
                H[j][i] = t1;
                H[j][i + 1] = t2;
            }
            double denom = std::hypot(H[j][j], H[j][j + 1]);
            if (denom == 0.0) denom = 1.0;
            cs[j] = H[j][j] / denom;
            sn[j] = H[j][j + 1] / denom;
            H[j][j] = denom;
            H[j][j + 1] = 0.0;
            double gj = g[j];
            g[j] = cs[j] * gj;
            g[j + 1] = -sn[j] * gj;

            // Reconstruct the candidate and record the true residual.
            y.assign(j + 1, 0.0);
            for (int i = j; i >= 0; --i) {
                double acc = g[i];
                for (int c = i + 1; c <= j; ++c) acc -= H[c][i] * y[c];
                y[i] = acc / H[i][i];
            }
            x_cycle = res.x;
            for (int c = 0; c <= j; ++c)
                for (int t = 0; t < n; ++t) x_cycle[t] += y[c] * Z[c][t];
            spmv_into(A, x_cycle, tmp);
            for (int t = 0; t < n; ++t) tmp[t] = b[t] - tmp[t];
            rn = norm2(tmp);
            ++total;
            if (opts.record_trace) res.residual_trace.push_back(rn);

            bool happy = hlast <= 1e-14 * std::abs(denom);
            if (rn <= target || happy) {
                res.converged = true;
                break;
            }
            if (hlast == 0.0) break;
            V.emplace_back(n);
            for (int t = 0; t < n; ++t) V[j + 1][t] = w[t] / hlast;
        }
        res.x = x_cycle;
    }
    res.iterations = total;
    res.core_time = seconds_since(t_core);
    res.wall_time = seconds_since(t_wall);
    return res;
}

}  // namespace nows
