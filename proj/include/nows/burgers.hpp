#pragma once

#include <functional>

#include "nows/grid.hpp"
#include "nows/krylov.hpp"

namespace nows {

struct BurgersCfg {
    int n = 256;        // periodic nodes on [0, 1)
    double nu = 0.05;   // viscosity
    double dt = 1e-3;
    int n_steps = 25;

    void check() const;
};

/// I - nu*dt*L on the periodic grid (L = second-difference / h^2); the SPD
/// target of the implicit diffusion solve.
CsrMatrix burgers_diffusion_matrix(const BurgersCfg& cfg);

/// Initial-guess-aware solver hook: x0 supplies the warm start.
using SolverHook = std::function<SolveResult(
    const CsrMatrix& A, std::span<const double> b, std::span<const double> x0)>;

struct BurgersStepResult {
    GridField u;
    SolveResult solve;
    bool cfl_exceeded = false;  // dt * max|u| / h > 1 on entry
};

/// One semi-implicit step: explicit conservative flux for d_x(u^2/2) via
/// local Lax-Friedrichs, then implicit diffusion solved through the hook
/// (x0 = x0_hint, typically zeros for the cold arm or an operator prediction
/// for the warm arm). mean(u) is preserved to solver tolerance.
BurgersStepResult burgers_step(const GridField& u, const BurgersCfg& cfg,
                               const CsrMatrix& diffusion,
                               const SolverHook& solve,
                               std::span<const double> x0_hint);

/// Convenience overload: cold start, direct CG with the given options.
BurgersStepResult burgers_step(const GridField& u, const BurgersCfg& cfg,
                               const CsrMatrix& diffusion,
                               const KrylovOpts& opts);

}  // namespace nows
