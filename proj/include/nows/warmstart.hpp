#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nows/dataset.hpp"
#include "nows/krylov.hpp"
#include "nows/neuralop.hpp"
#include "nows/problems.hpp"

namespace nows {

/// Where the warm iterate comes from: zeros (the cold control), the known
/// solution plus scaled noise (oracle), or a trained operator.
struct Initializer {
    enum class Kind { zero, oracle, op } kind = Kind::zero;
    double perturbation = 0.0;  // oracle: noise scale relative to ||x*||
    uint64_t noise_seed = 0;
    FnoModel* model = nullptr;  // op: non-owning

    static Initializer zero() { return {}; }
    static Initializer oracle(double scale, uint64_t seed) {
        Initializer i;
        i.kind = Kind::oracle;
        i.perturbation = scale;
        i.noise_seed = seed;
        return i;
    }
    static Initializer op(FnoModel& m) {
        Initializer i;
        i.kind = Kind::op;
        i.model = &m;
        return i;
    }
};

/// Initial iterate in the instance's solver ordering. Operator predictions
/// are normalized/denormalized with the model's training stats, evaluated
/// at the instance resolution, boundary-masked when the model says so, and
/// mapped onto the unknown vector (interior extraction for darcy).
std::vector<double> predict_initial(const Initializer& init,
                                    const ProblemInstance& inst);

struct NowsResult {
    SolveResult baseline;
    SolveResult warmed;
    double warm_start_error = 0.0;   // rel L2 of u0 against the reference
    double iteration_saving = 0.0;   // percent, 100*(1 - warm/base)
    double time_saving = 0.0;        // percent, solver core time
    double time_saving_total = 0.0;  // percent, inference included
    double inference_time = 0.0;     // seconds spent in predict_initial
    bool both_converged = false;
};

/// Cold arm (zero start) and warm arm on the identical system, matrix,
/// preconditioner and tolerance; both stop at the same absolute target
/// eps_rel * ||b||. Savings are only meaningful when both arms converge.
NowsResult warm_start_solve(const ProblemInstance& inst, const Initializer& init,
                            const Preconditioner& M, const KrylovOpts& opts,
                            bool use_gmres = false);

/// Core of warm_start_solve for callers that already hold the warm iterate
/// (the dynamic rollout runners).
NowsResult paired_solve(const CsrMatrix& A, std::span<const double> b,
                        std::span<const double> warm_x0, double inference_time,
                        std::span<const double> reference,
                        const Preconditioner& M, const KrylovOpts& opts,
                        bool use_gmres = false);

double rel_l2_error(std::span<const double> x, std::span<const double> ref);

}  // namespace nows
