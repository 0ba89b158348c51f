#include "nows/smoke.hpp"

#include <algorithm>
#include <cmath>

namespace nows {

void SmokeParams::check() const {
    if (dt <= 0.0) throw std::invalid_argument("SmokeParams: dt > 0");
    if (nu < 0.0 || diffusivity < 0.0)
        throw std::invalid_argument("SmokeParams: diffusion coefficients >= 0");
    if (projection_tol <= 0.0)
        throw std::invalid_argument("SmokeParams: projection_tol > 0");
}

void SmokeState::check() const {
    u.check();
    v.check();
    p.check();
    rho.check();
    if (u.shape != v.shape || u.shape != p.shape || u.shape != rho.shape)
        throw std::invalid_argument("SmokeState: all fields must share a shape");
}

SmokeState smoke_zero_state(int m) {
    double h = 1.0 / m;
    SmokeState s;
    s.u = GridField::make_2d(m, m, h, h, 0.5 * h, 0.5 * h);
    s.v = s.u;
    s.p = s.u;
    s.rho = s.u;
    return s;
}

SmokeState smoke_initial_state(int m, const SmokeParams& params) {
    SmokeState s = smoke_zero_state(m);
    const double cx = 0.5, cy = 0.25, radius = 0.08;
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            double x = s.rho.coord(1, ix), y = s.rho.coord(0, iy);
            double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            s.rho.at(iy, ix) =
                params.rho0 + std::exp(-r2 / (2.0 * radius * radius));
        }
    return s;
}

SmokeOps make_smoke_ops(int m) {
    if (m < 3) throw std::invalid_argument("make_smoke_ops: m >= 3");
    SmokeOps ops;
    ops.m = m;
    ops.h = 1.0 / m;
    const double c = 0.5 / ops.h;
    const int cells = m * m;
    auto id = [m](int iy, int ix) { return iy * m + ix; };

    // D: cells x (u slots | v slots); one interior face couples two cells.
    std::vector<Triplet> dtrips;
    dtrips.reserve(static_cast<size_t>(cells) * 8);
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix + 1 < m; ++ix) {
            int a = id(iy, ix), b = id(iy, ix + 1);
            dtrips.push_back({a, a, c});
            dtrips.push_back({a, b, c});
            dtrips.push_back({b, a, -c});
            dtrips.push_back({b, b, -c});
        }
    for (int iy = 0; iy + 1 < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            int a = id(iy, ix), b = id(iy + 1, ix);
            dtrips.push_back({a, cells + a, c});
            dtrips.push_back({a, cells + b, c});
            dtrips.push_back({b, cells + a, -c});
            dtrips.push_back({b, cells + b, -c});
        }
    CsrMatrix D = csr_from_triplets(dtrips, cells, 2 * cells);
    ops.A = csr_matmul(D, csr_transpose(D));
    return ops;
}

std::vector<double> SmokeOps::divergence(const GridField& u,
                                         const GridField& v) const {
    std::vector<double> d(static_cast<size_t>(m) * m, 0.0);
    const double c = 0.5 / h;
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix + 1 < m; ++ix) {
            double f = c * (u.at(iy, ix) + u.at(iy, ix + 1));
            d[iy * m + ix] += f;
            d[iy * m + ix + 1] -= f;
        }
    for (int iy = 0; iy + 1 < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            double f = c * (v.at(iy, ix) + v.at(iy + 1, ix));
            d[iy * m + ix] += f;
            d[(iy + 1) * m + ix] -= f;
        }
    return d;
}

void SmokeOps::add_pressure_gradient(std::span<const double> p, GridField& gu,
                                     GridField& gv) const {
    const double c = 0.5 / h;
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix + 1 < m; ++ix) {
            double d = c * (p[iy * m + ix + 1] - p[iy * m + ix]);
            gu.at(iy, ix) += d;
            gu.at(iy, ix + 1) += d;
        }
    for (int iy = 0; iy + 1 < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            double d = c * (p[(iy + 1) * m + ix] - p[iy * m + ix]);
            gv.at(iy, ix) += d;
            gv.at(iy + 1, ix) += d;
        }
}

GridField advect(const GridField& field, const GridField& u,
                 const GridField& v, double dt) {
    field.check();
    const int m0 = field.shape[0], m1 = field.shape[1];
    const double h0 = field.spacing[0], h1 = field.spacing[1];
    GridField out = field;
    const double xmin = field.origin[1], ymin = field.origin[0];
    const double xmax = xmin + (m1 - 1) * h1, ymax = ymin + (m0 - 1) * h0;
    for (int iy = 0; iy < m0; ++iy)
        for (int ix = 0; ix < m1; ++ix) {
            double x = field.coord(1, ix) - dt * u.at(iy, ix);
            double y = field.coord(0, iy) - dt * v.at(iy, ix);
            x = std::clamp(x, xmin, xmax);
            y = std::clamp(y, ymin, ymax);
            double fx = (x - xmin) / h1, fy = (y - ymin) / h0;
            int jx = std::min(static_cast<int>(fx), m1 - 2);
            int jy = std::min(static_cast<int>(fy), m0 - 2);
            double tx = fx - jx, ty = fy - jy;
            out.at(iy, ix) =
                (1 - ty) * ((1 - tx) * field.at(jy, jx) + tx * field.at(jy, jx + 1)) +
                ty * ((1 - tx) * field.at(jy + 1, jx) + tx * field.at(jy + 1, jx + 1));
        }
    return out;
}

namespace {

/// Explicit 5-point diffusion with zero-flux walls (reflected neighbors).
void diffuse(GridField& f, double coeff, double dt) {
    if (coeff <= 0.0) return;
    const int m0 = f.shape[0], m1 = f.shape[1];
    const double c = coeff * dt / (f.spacing[0] * f.spacing[0]);
    GridField src = f;
    auto val = [&](int iy, int ix) {
        iy = std::clamp(iy, 0, m0 - 1);
        ix = std::clamp(ix, 0, m1 - 1);
        return src.at(iy, ix);
    };
    for (int iy = 0; iy < m0; ++iy)
        for (int ix = 0; ix < m1; ++ix)
            f.at(iy, ix) = src.at(iy, ix) +
                           c * (val(iy, ix - 1) + val(iy, ix + 1) + val(iy - 1, ix) +
                                val(iy + 1, ix) - 4.0 * src.at(iy, ix));
}

void subtract_mean(std::span<double> x) {
    double mu = 0.0;
    for (double t : x) mu += t;
    mu /= static_cast<double>(x.size());
    for (double& t : x) t -= mu;
}

}  // namespace

SmokeStepResult smoke_step(const SmokeState& state, const SmokeParams& params,
                           const SmokeOps& ops, std::span<const double> p0_hint,
                           const KrylovOpts& base_opts) {
    params.check();
    state.check();
    const int m = state.m();
    if (ops.m != m) throw std::invalid_argument("smoke_step: ops/state mismatch");

    SmokeStepResult out;
    out.state = state;
    SmokeState& s = out.state;

    s.u = advect(state.u, state.u, state.v, params.dt);
    s.v = advect(state.v, state.u, state.v, params.dt);
    s.rho = advect(state.rho, state.u, state.v, params.dt);
    diffuse(s.u, params.nu, params.dt);
    diffuse(s.v, params.nu, params.dt);
    diffuse(s.rho, params.diffusivity, params.dt);
    for (size_t i = 0; i < s.v.data.size(); ++i)
        s.v.data[i] += params.dt * params.gravity * params.beta *
                       (s.rho.data[i] - params.rho0);

    // Projection: A q = -div(u*)/dt; post-correction divergence equals
    // dt * (CG residual), so the solver tolerance implements the contract.
    std::vector<double> div = ops.divergence(s.u, s.v);
    double umax = 0.0;
    for (size_t i = 0; i < s.u.data.size(); ++i)
        umax = std::max(umax, std::max(std::abs(s.u.data[i]), std::abs(s.v.data[i])));
    out.div_target = params.projection_tol * (umax + 1.0);

    std::vector<double> b(div.size());
    for (size_t i = 0; i < div.size(); ++i) b[i] = -div[i] / params.dt;
    subtract_mean(b);
    std::vector<double> x0(b.size(), 0.0);
    if (!p0_hint.empty()) {
        if (p0_hint.size() != b.size())
            throw std::invalid_argument("smoke_step: pressure hint size mismatch");
        x0.assign(p0_hint.begin(), p0_hint.end());
        subtract_mean(x0);
    }
    KrylovOpts opts = base_opts;
    opts.rel_tol = 0.0;
    opts.abs_tol = 0.5 * out.div_target / params.dt;
    out.projection = cg_solve(ops.A, b, x0, Preconditioner{}, opts);

    subtract_mean(out.projection.x);
    s.p.data = out.projection.x;
    GridField gu = s.u, gv = s.v;
    std::fill(gu.data.begin(), gu.data.end(), 0.0);
    std::fill(gv.data.begin(), gv.data.end(), 0.0);
    ops.add_pressure_gradient(out.projection.x, gu, gv);
    for (size_t i = 0; i < s.u.data.size(); ++i) {
        s.u.data[i] -= params.dt * gu.data[i];
        s.v.data[i] -= params.dt * gv.data[i];
    }
    return out;
}

}  // namespace nows
