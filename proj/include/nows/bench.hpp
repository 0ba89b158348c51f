#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nows/dataset.hpp"
#include "nows/warmstart.hpp"

namespace nows {

struct ExperimentConfig {
    ProblemKind problem = ProblemKind::poisson;
    std::vector<int> resolutions{32};
    std::vector<PrecondKind> preconditioners{PrecondKind::none};
    std::vector<double> tolerances{1e-5};
    int samples = 10;
    uint64_t seed = 9000;
    std::string model_path;                 // required for the operator kind
    std::string initializer = "operator";   // zero | oracle | operator
    double perturbation = 0.0;              // oracle noise scale
    std::string solver = "cg";              // cg | gmres
    int max_iters = 100000;
    double ssor_omega = 1.0;
    int workers = 1;
    double grf_length_scale = 0.1;
    DarcyCoeffSpec darcy;
    BurgersCfg burgers;
    SmokeParams smoke;
    int smoke_steps = 60;

    void check() const;
};

struct BenchRecord {
    int64_t sample = 0;
    int resolution = 0;
    std::string preconditioner;
    double tolerance = 0.0;
    int64_t iters_base = 0, iters_warm = 0;
    double t_base = 0.0, t_warm = 0.0;  // solver core seconds
    double inference_t = 0.0;
    double warm_start_error = 0.0;
    double iter_saving = 0.0, time_saving = 0.0;  // percent; valid when converged
    bool converged_base = false, converged_warm = false;
};

struct Stats {
    int64_t converged = 0;
    int64_t failures = 0;  // records with a non-converged arm
    double mean_iter_saving = 0.0, median_iter_saving = 0.0;
    double min_iter_saving = 0.0, max_iter_saving = 0.0;
    double mean_time_saving = 0.0, median_time_saving = 0.0;
    double min_time_saving = 0.0, max_time_saving = 0.0;
    double mean_total_time_saving = 0.0;  // inference included
    double pearson_r = 0.0;  // warm_start_error vs iteration saving
};

/// One example residual trace pair per sweep configuration (for the plots).
struct TracePair {
    int resolution = 0;
    std::string preconditioner;
    double tolerance = 0.0;
    std::vector<double> baseline;
    std::vector<double> warmed;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<BenchRecord> records;
    std::vector<TracePair> traces;
    Stats summary;
};

/// Full sweep: samples x resolutions x preconditioners x tolerances, one
/// record each. `data`, when given, supplies the benchmark inputs (bench
/// --data); otherwise instances are synthesized from the seed. Deterministic
/// except for the wall-clock fields. A warm-up solve per configuration is
/// discarded before timing.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const Dataset* data = nullptr);

/// Savings statistics over records where both arms converged. Throws when
/// none converged.
Stats summarize(const std::vector<BenchRecord>& records);

/// report.json + records.csv (schema-stable, shortest-round-trip floats).
void emit_report(const ExperimentReport& report, const std::string& dir);
/// Residual-vs-iteration (log y, two polylines) per config, savings
/// histogram, runtime summary.
void emit_plots(const ExperimentReport& report, const std::string& dir);

ExperimentReport read_report(const std::string& path);
std::vector<BenchRecord> read_records_csv(const std::string& path);

/// Sum of total per-record savings fields; helper for total-time statistics.
double total_time_saving(const BenchRecord& r);

}  // namespace nows
