#pragma once

#include <string>

#include "nows/bench.hpp"
#include "nows/dataset.hpp"
#include "nows/train.hpp"

namespace nows {

/// Typed view of the JSON run configuration. Parsing is strict: any unknown
/// key fails fast with the offending path. Every field has a default; an
/// empty JSON object is a valid config.
struct RunConfig {
    GenConfig gen;

    struct ModelCfg {
        std::string kind = "fno";  // fno | mhno
        int modes = 12;
        int width = 16;
        int layers = 4;
        int q_width = 64;
        int h_width = 32;
        bool coord_channels = true;
        std::string activation = "gelu";
        int boundary_mask = -1;  // -1 auto (static problems), else 0/1
        uint64_t init_seed = 7;
    } model;

    TrainConfig train;

    struct SolverCfg {
        std::string method = "cg";  // cg | gmres
        double rel_tol = 1e-12;     // dataset-generation solves
        double abs_tol = 0.0;
        int max_iters = 200000;
        int restart = 30;
        double omega = 1.0;
    } solver;

    struct BenchCfg {
        int samples = 10;
        uint64_t seed = 9000;
        std::vector<int> resolutions;  // defaults to [problem n]
        std::vector<std::string> preconditioners{"none"};
        std::vector<double> tolerances{1e-5};
        std::string initializer = "operator";
        double perturbation = 0.0;
        int workers = 1;
        int smoke_steps = 60;
    } bench;

    bool boundary_mask_effective() const;
    ExperimentConfig to_experiment(const std::string& model_path) const;
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& json_text);

/// Fresh models configured per the run config and normalized against ds.
FnoModel build_fno(const RunConfig& cfg, const Dataset& ds);
MhnoModel build_mhno(const RunConfig& cfg, const Dataset& ds);

}  // namespace nows
