#pragma once

#include <span>

#include "nows/grid.hpp"
#include "nows/krylov.hpp"

namespace nows {

struct SmokeParams {
    double nu = 1e-4;          // kinematic viscosity
    double beta = 1.0;         // buoyancy coefficient
    double gravity = 9.81;     // magnitude; buoyant force acts upward (+y)
    double diffusivity = 1e-4; // scalar diffusion of the smoke density
    double rho0 = 0.0;         // reference density
    double dt = 0.01;
    /// Post-step divergence contract: ||div||_inf <= projection_tol *
    /// (||u||_inf + 1). The projection solve tolerance is derived from this.
    double projection_tol = 1e-7;

    void check() const;
};

/// Collocated cell-centered state on an m x m grid over the closed unit box
/// (cells at ((i+1/2)h, (j+1/2)h), h = 1/m). Walls are no-through-flow.
struct SmokeState {
    GridField u;    // x velocity
    GridField v;    // y velocity (positive = up)
    GridField p;    // last projection pressure (mean-zero)
    GridField rho;  // smoke density

    int m() const { return u.shape[0]; }
    void check() const;
};

SmokeState smoke_zero_state(int m);

/// Standard benchmark start: quiescent flow with a hot blob (rho above the
/// reference) centered at (0.5, 0.25).
SmokeState smoke_initial_state(int m, const SmokeParams& params);

/// Discrete operators for one resolution. The divergence D is the FVM
/// face-average form with zero wall fluxes; the gradient is G = -D^T so the
/// pressure matrix A = D D^T is symmetric positive semidefinite with the
/// constants as its only null space (mean-zero pinned solves).
struct SmokeOps {
    int m = 0;
    double h = 0.0;
    CsrMatrix A;

    std::vector<double> divergence(const GridField& u, const GridField& v) const;
    /// gu += (G p)_x, gv += (G p)_y.
    void add_pressure_gradient(std::span<const double> p, GridField& gu,
                               GridField& gv) const;
};

SmokeOps make_smoke_ops(int m);

/// Semi-Lagrangian transport of `field` by (u, v): bilinear back-trace
/// clamped to the domain (no extrapolation). Exposed separately for the
/// max-principle property.
GridField advect(const GridField& field, const GridField& u,
                 const GridField& v, double dt);

struct SmokeStepResult {
    SmokeState state;
    SolveResult projection;
    double div_target = 0.0;  // projection_tol * (||u*||_inf + 1)
};

/// One step: semi-Lagrangian advection of u, v, rho; explicit diffusion
/// (nu on velocity, diffusivity on rho); buoyancy +g*beta*(rho - rho0) on v;
/// pressure projection solved by CG from `p0_hint` (zeros when empty),
/// velocity corrected with G so the post-step divergence meets the target.
/// A non-convergent projection is reported in the SolveResult, not thrown.
SmokeStepResult smoke_step(const SmokeState& state, const SmokeParams& params,
                           const SmokeOps& ops, std::span<const double> p0_hint,
                           const KrylovOpts& base_opts);

}  // namespace nows
