#include "nows/warmstart.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "nows/rng.hpp"

namespace nows {

double rel_l2_error(std::span<const double> x, std::span<const double> ref) {
    double dn = 0.0, rn = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - ref[i];
        dn += d * d;
        rn += ref[i] * ref[i];
    }
    return rn > 0.0 ? std::sqrt(dn / rn) : std::sqrt(dn);
}

std::vector<double> predict_initial(const Initializer& init,
                                    const ProblemInstance& inst) {
    const size_t n = inst.b.size();
    switch (init.kind) {
        case Initializer::Kind::zero:
            return std::vector<double>(n, 0.0);
        case Initializer::Kind::oracle: {
            if (!inst.reference)
                throw std::invalid_argument(
                    "predict_initial: oracle initializer needs a reference solution");
            std::vector<double> u0 = *inst.reference;
            if (init.perturbation > 0.0) {
                Rng rng(init.noise_seed);
                std::vector<double> g(n);
                double gn = 0.0;
                for (double& v : g) {
                    v = rng.normal();
                    gn += v * v;
                }
                gn = std::sqrt(gn);
                double xn = norm2(u0);
                double scale = init.perturbation * xn / (gn > 0.0 ? gn : 1.0);
                for (size_t i = 0; i < n; ++i) u0[i] += scale * g[i];
            }
            return u0;
        }
        case Initializer::Kind::op: {
            if (init.model == nullptr)
                throw std::invalid_argument("predict_initial: operator model missing");
            GridField pred = fno_forward(*init.model, inst.input_field);
            if (inst.kind == ProblemKind::poisson) {
                if (pred.size() != n)
                    throw std::invalid_argument("predict_initial: prediction size mismatch");
                return pred.data;
            }
            if (inst.kind == ProblemKind::darcy) {
                // Nodal prediction -> interior unknowns.
                const int nodes = pred.shape[0];
                const int ni = nodes - 2;
                if (static_cast<size_t>(ni) * ni != n)
                    throw std::invalid_argument("predict_initial: prediction size mismatch");
                std::vector<double> u0(n);
                for (int iy = 1; iy <= ni; ++iy)
                    for (int ix = 1; ix <= ni; ++ix)
                        u0[(iy - 1) * ni + (ix - 1)] = pred.at(iy, ix);
                return u0;
            }
            if (inst.kind == ProblemKind::smoke) {
                // Mean-zero pinned pressure solve: deflate the prediction.
                std::vector<double> u0 = pred.data;
                double mu = 0.0;
                for (double v : u0) mu += v;
                mu /= static_cast<double>(u0.size());
                for (double& v : u0) v -= mu;
                return u0;
            }
            throw std::invalid_argument(
                "predict_initial: operator initializer unsupported for this problem");
        }
    }
    return std::vector<double>(n, 0.0);
}

NowsResult paired_solve(const CsrMatrix& A, std::span<const double> b,
                        std::span<const double> warm_x0, double inference_time,
                        std::span<const double> reference,
                        const Preconditioner& M, const KrylovOpts& opts,
                        bool use_gmres) {
    NowsResult res;
    res.inference_time = inference_time;
    std::vector<double> zeros(b.size(), 0.0);
    auto solve = [&](std::span<const double> x0) {
        return use_gmres ? gmres_solve(A, b, x0, M, opts)
                         : cg_solve(A, b, x0, M, opts);
    };
    res.baseline = solve(zeros);
    res.warmed = solve(warm_x0);
    if (!reference.empty())
        res.warm_start_error = rel_l2_error(warm_x0, reference);
    else if (res.baseline.converged)
        res.warm_start_error = rel_l2_error(warm_x0, res.baseline.x);
    res.both_converged = res.baseline.converged && res.warmed.converged;
    if (res.both_converged) {
        if (res.baseline.iterations > 0)
            res.iteration_saving =
                100.0 * (1.0 - static_cast<double>(res.warmed.iterations) /
                                   res.baseline.iterations);
        if (res.baseline.core_time > 0.0) {
            res.time_saving =
                100.0 * (1.0 - res.warmed.core_time / res.baseline.core_time);
            res.time_saving_total =
                100.0 * (1.0 - (res.warmed.core_time + inference_time) /
                                   res.baseline.core_time);
        }
    }
    return res;
}

NowsResult warm_start_solve(const ProblemInstance& inst, const Initializer& init,
                            const Preconditioner& M, const KrylovOpts& opts,
                            bool use_gmres) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> u0 = predict_initial(init, inst);
    double inference =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::span<const double> ref;
    if (inst.reference) ref = *inst.reference;
    return paired_solve(inst.A, inst.b, u0, inference, ref, M, opts, use_gmres);
}

}  // namespace nows
