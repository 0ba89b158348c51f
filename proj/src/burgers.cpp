#include "nows/burgers.hpp"

#include <cmath>

namespace nows {

void BurgersCfg::check() const {
    if (n < 8) throw std::invalid_argument("BurgersCfg: n >= 8");
    if (nu <= 0.0) throw std::invalid_argument("BurgersCfg: nu > 0");
    if (dt <= 0.0) throw std::invalid_argument("BurgersCfg: dt > 0");
    if (n_steps < 1) throw std::invalid_argument("BurgersCfg: n_steps >= 1");
}

CsrMatrix burgers_diffusion_matrix(const BurgersCfg& cfg) {
    cfg.check();
    const int n = cfg.n;
    const double h = 1.0 / n;
    const double c = cfg.nu * cfg.dt / (h * h);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(n) * 3);
    for (int i = 0; i < n; ++i) {
        trips.push_back({i, i, 1.0 + 2.0 * c});
        trips.push_back({i, (i + 1) % n, -c});
        trips.push_back({i, (i + n - 1) % n, -c});
    }
    return csr_from_triplets(trips, n, n);
}

BurgersStepResult burgers_step(const GridField& u, const BurgersCfg& cfg,
                               const CsrMatrix& diffusion,
                               const SolverHook& solve,
                               std::span<const double> x0_hint) {
    cfg.check();
    u.check();
    if (u.dims != 1 || u.shape[0] != cfg.n)
        throw std::invalid_argument("burgers_step: field/config mismatch");
    const int n = cfg.n;
    const double h = 1.0 / n;

    double umax = 0.0;
    for (double v : u.data) umax = std::max(umax, std::abs(v));
    BurgersStepResult out;
    out.cfl_exceeded = cfg.dt * umax / h > 1.0;

    // Conservative advection: local Lax-Friedrichs flux for f(u) = u^2/2.
    std::vector<double> star(n);
    auto flux = [&](int i) {
        int ip = (i + 1) % n;
        double ul = u.data[i], ur = u.data[ip];
        double alpha = std::max(std::abs(ul), std::abs(ur));
        return 0.5 * (0.5 * ul * ul + 0.5 * ur * ur) - 0.5 * alpha * (ur - ul);
    };
    std::vector<double> F(n);
    for (int i = 0; i < n; ++i) F[i] = flux(i);
    for (int i = 0; i < n; ++i) {
        double fm = F[(i + n - 1) % n];
        star[i] = u.data[i] - cfg.dt / h * (F[i] - fm);
    }

    SolveResult sr = solve(diffusion, star, x0_hint);
    out.u = u;
    out.u.data = sr.x;
    out.solve = std::move(sr);
    return out;
}

BurgersStepResult burgers_step(const GridField& u, const BurgersCfg& cfg,
                               const CsrMatrix& diffusion,
                               const KrylovOpts& opts) {
    std::vector<double> zeros(cfg.n, 0.0);
    return burgers_step(
        u, cfg, diffusion,
        [&](const CsrMatrix& A, std::span<const double> b,
            std::span<const double> x0) {
            return cg_solve(A, b, x0, Preconditioner{}, opts);
        },
        zeros);
}

}  // namespace nows
