#include <cmath>
#include <cstdio>
#include <vector>

#include "nows/fft.hpp"
#include "nows/problems.hpp"
#include "nows/rng.hpp"

namespace nows {

namespace {

/// Sample on an n0 x n1 lattice via circulant embedding on the doubled
/// torus (m0 x m1). Spectral weights are the DFT of the wrapped covariance;
/// tiny negative eigenvalues (the embedding is not exactly PSD for the RBF
/// kernel) are clipped at zero.
GridField circulant_sample(int n0, int n1, int m0, int m1, double h,
                           double length_scale, uint64_t seed) {
    const size_t M = static_cast<size_t>(m0) * m1;
    std::vector<cplx> cov(M);
    const double inv2l2 = 1.0 / (2.0 * length_scale * length_scale);
    for (int j0 = 0; j0 < m0; ++j0) {
        double d0 = h * std::min(j0, m0 - j0);
        for (int j1 = 0; j1 < m1; ++j1) {
            double d1 = h * std::min(j1, m1 - j1);
            cov[static_cast<size_t>(j0) * m1 + j1] =
                cplx(std::exp(-(d0 * d0 + d1 * d1) * inv2l2), 0.0);
        }
    }
    // lambda = forward DFT of the covariance (real by symmetry).
    if (m0 > 1) {
        std::vector<cplx> col(m0);
        for (int j1 = 0; j1 < m1; ++j1) {
            for (int j0 = 0; j0 < m0; ++j0) col[j0] = cov[static_cast<size_t>(j0) * m1 + j1];
            fft::cfft(col.data(), m0, -1);
            for (int j0 = 0; j0 < m0; ++j0) cov[static_cast<size_t>(j0) * m1 + j1] = col[j0];
        }
    }
    for (int j0 = 0; j0 < m0; ++j0)
        fft::cfft(cov.data() + static_cast<size_t>(j0) * m1, m1, -1);

    double neg = 0.0, tot = 0.0;
    std::vector<double> lam(M);
    for (size_t i = 0; i < M; ++i) {
        double l = cov[i].real();
        tot += std::abs(l);
        if (l < 0.0) {
            neg += -l;
            l = 0.0;
        }
        lam[i] = l;
    }
    if (tot > 0.0 && neg / tot > 1e-10)
        std::fprintf(stderr,
                     "[nows] grf: clipped %.3e relative negative spectral mass "
                     "in circulant embedding\n",
                     neg / tot);

    Rng rng(seed);
    std::vector<cplx> w(M);
    const double inv_sqrt_M = 1.0 / std::sqrt(static_cast<double>(M));
    for (size_t i = 0; i < M; ++i) {
        double a = rng.normal();
        double b = rng.normal();
        w[i] = std::sqrt(lam[i]) * cplx(a, b);
    }
    // X = F_+ (sqrt(lam) zeta) / sqrt(M); Re(X) ~ N(0, C) exactly.
    if (m0 > 1) {
        std::vector<cplx> col(m0);
        for (int j1 = 0; j1 < m1; ++j1) {
            for (int j0 = 0; j0 < m0; ++j0) col[j0] = w[static_cast<size_t>(j0) * m1 + j1];
            fft::cfft(col.data(), m0, +1);
            for (int j0 = 0; j0 < m0; ++j0) w[static_cast<size_t>(j0) * m1 + j1] = col[j0];
        }
    }
    for (int j0 = 0; j0 < m0; ++j0)
        fft::cfft(w.data() + static_cast<size_t>(j0) * m1, m1, +1);

    GridField f = (n0 > 1) ? GridField::make_2d(n0, n1, h, h)
                           : GridField::make_1d(n1, h);
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1)
            f.data[static_cast<size_t>(i0) * n1 + i1] =
                w[static_cast<size_t>(i0) * m1 + i1].real() * inv_sqrt_M;
    return f;
}

}  // namespace

GridField sample_grf_on(int n0, int n1, double h, double length_scale,
                        uint64_t seed) {
    if (n0 < 1 || n1 < 2 || h <= 0.0 || length_scale <= 0.0)
        throw std::invalid_argument("sample_grf_on: invalid grid or length scale");
    return circulant_sample(n0, n1, n0 > 1 ? 2 * n0 : 1, 2 * n1, h,
                            length_scale, seed);
}

GridField sample_grf(const GrfSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("sample_grf: n >= 2 required");
    if (spec.length_scale <= 0.0)
        throw std::invalid_argument("sample_grf: length_scale > 0 required");
    double h = 1.0 / (spec.n - 1);
    return sample_grf_on(spec.n, spec.n, h, spec.length_scale, spec.seed);
}

GridField sample_grf_periodic_1d(int n, double length_scale, uint64_t seed) {
    if (n < 2) throw std::invalid_argument("sample_grf_periodic_1d: n >= 2");
    // No doubling: the wrap-around covariance is the periodic process itself.
    return circulant_sample(1, n, 1, n, 1.0 / n, length_scale, seed);
}

GridField darcy_coefficient(const GridField& g, const DarcyCoeffSpec& spec) {
    g.check();
    for (double v : g.data)
        if (!std::isfinite(v))
            throw std::invalid_argument("darcy_coefficient: non-finite input");
    GridField a = g;
    if (spec.mode == DarcyCoeffSpec::Mode::lognormal) {
        for (double& v : a.data) v = std::exp(spec.alpha * v);
    } else {
        if (spec.a_lo <= 0.0 || spec.a_hi <= 0.0)
            throw std::invalid_argument("darcy_coefficient: piecewise levels must be > 0");
        for (double& v : a.data) v = v < 0.0 ? spec.a_lo : spec.a_hi;
    }
    return a;
}

}  // namespace nows
