#pragma once

#include <span>
#include <string>
#include <vector>

#include "nows/sparse.hpp"

namespace nows {

struct KrylovOpts {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_iters = 10000;
    int restart = 30;  // GMRES only
    bool record_trace = true;

    void check() const;
    /// Stopping target for the true residual: max(rel_tol*||b||, abs_tol).
    /// rel_tol is measured against ||b||, not ||r0||, so cold and warm
    /// starts converge to the same absolute accuracy.
    double target(double b_norm) const;
};

enum class PrecondKind { none, jacobi, ssor, ic0, ilu0 };

const char* precond_name(PrecondKind k);
PrecondKind precond_from_name(const std::string& name);

/// A fixed linear map z = M^{-1} r. For jacobi/ssor/ic0 on SPD input the map
/// is SPD, as required by CG.
class Preconditioner {
  public:
    Preconditioner() = default;  // identity

    PrecondKind kind() const { return kind_; }
    double omega() const { return omega_; }

    void apply(std::span<const double> r, std::span<double> z) const;
    std::vector<double> apply(std::span<const double> r) const;

    /// ic0 factor L (lower triangular, L*L^T ~ A on sparsity(A)).
    const CsrMatrix& lower() const { return lower_; }
    /// ilu0 factor U (upper triangular incl. diagonal; L is unit lower).
    const CsrMatrix& upper() const { return upper_; }

    friend Preconditioner make_preconditioner(const CsrMatrix& A,
                                              PrecondKind kind, double omega);

  private:
    PrecondKind kind_ = PrecondKind::none;
    double omega_ = 1.0;
    int n_ = 0;
    std::vector<double> diag_;      // jacobi: 1/A_ii; ssor: A_ii
    CsrMatrix lower_, upper_;       // factors or strict triangles (ssor)
    CsrMatrix lower_t_;             // transpose of lower_ for backward sweeps
};

/// Build a preconditioner from A. ic0 requires symmetric A and positive
/// pivots (throws on breakdown); jacobi/ssor/ilu0 throw on zero diagonal.
Preconditioner make_preconditioner(const CsrMatrix& A, PrecondKind kind,
                                   double omega = 1.0);

struct SolveResult {
    std::vector<double> x;
    int iterations = 0;
    bool converged = false;
    /// True-residual 2-norms; index 0 is the initial residual. Present when
    /// opts.record_trace.
    std::vector<double> residual_trace;
    double wall_time = 0.0;  // whole call, seconds
    double core_time = 0.0;  // iteration loop only, seconds
};

/// Preconditioned conjugate gradient. A must be SPD (unchecked; misuse
/// yields non-convergence, not corruption). Stopping tests the true residual
/// ||b - A x|| against opts.target(||b||) every iteration.
SolveResult cg_solve(const CsrMatrix& A, std::span<const double> b,
                     std::span<const double> x0, const Preconditioner& M,
                     const KrylovOpts& opts);

/// Restarted GMRES(k), right-preconditioned, Arnoldi with modified
/// Gram-Schmidt and Givens least squares. The true residual is recomputed
/// and recorded at every inner step; happy breakdown counts as convergence.
SolveResult gmres_solve(const CsrMatrix& A, std::span<const double> b,
                        std::span<const double> x0, const Preconditioner& M,
                        const KrylovOpts& opts);

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace nows
