#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nows/burgers.hpp"
#include "nows/problems.hpp"
#include "nows/smoke.hpp"

namespace nows {

/// Training corpus for one problem family. For Burgers each output is a
/// 2D stack (n_steps x n) of trajectory snapshots; everywhere else inputs
/// and outputs are single fields. Smoke may carry velocity channels next to
/// the pressure input when velocity_input is set.
struct Dataset {
    ProblemKind problem = ProblemKind::poisson;
    int resolution = 0;
    uint64_t seed = 0;

    std::vector<GridField> inputs;
    std::vector<GridField> inputs_u;  // smoke velocity channels (optional)
    std::vector<GridField> inputs_v;
    std::vector<GridField> outputs;

    std::vector<double> in_mean, in_std;  // one per input channel
    double out_mean = 0.0, out_std = 1.0;

    double grf_length_scale = 0.1;
    DarcyCoeffSpec darcy;
    BurgersCfg burgers;
    SmokeParams smoke;
    bool velocity_input = false;

    size_t size() const { return inputs.size(); }
    int input_channels() const { return velocity_input ? 3 : 1; }
    void check() const;
};

struct GenConfig {
    ProblemKind problem = ProblemKind::poisson;
    int n = 16;          // resolution parameter (see per-problem conventions)
    int samples = 10;
    uint64_t seed = 0;
    double grf_length_scale = 0.1;
    DarcyCoeffSpec darcy;
    BurgersCfg burgers;
    SmokeParams smoke;
    int smoke_warmup = 5;
    bool smoke_velocity_input = false;
    KrylovOpts solver{1e-12, 0.0, 100000, 30, false};
};

/// Build the dataset for cfg.problem. Every stored output satisfies its
/// residual check (<= 1e-10 relative); a non-converged sample aborts with
/// the sample index. Sample i draws from seed + i, so serial and parallel
/// generation agree.
Dataset generate_dataset(const GenConfig& cfg);

/// Rebuild the linear system behind dataset sample i (matrix, rhs, reference
/// from the stored output). Used by bench --data. Only meaningful for the
/// static problems (poisson, darcy).
ProblemInstance instance_from_sample(const Dataset& ds, size_t i);

/// Fresh instance for held-out evaluation at resolution n (sample seeds are
/// offset from the dataset's generation stream). Static problems only.
ProblemInstance make_instance(ProblemKind kind, int n, double grf_length_scale,
                              const DarcyCoeffSpec& darcy, uint64_t seed,
                              const KrylovOpts& solver, bool with_reference);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace nows
