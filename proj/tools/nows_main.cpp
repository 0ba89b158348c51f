#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nows/bench.hpp"
#include "nows/config.hpp"
#include "nows/container.hpp"
#include "nows/dataset.hpp"
#include "nows/train.hpp"

namespace {

struct Args {
    std::string config_path;
    std::string data_path;
    std::string model_path;
    std::string out_path;
    std::string report_in;
    std::string plots_dir;
    std::optional<uint64_t> seed;
};

int cmd_gen(const Args& a) {
    nows::RunConfig cfg = nows::parse_run_config(a.config_path);
    if (a.seed) cfg.gen.seed = *a.seed;
    nows::Dataset ds = nows::generate_dataset(cfg.gen);
    nows::save_dataset(ds, a.out_path);
    std::cout << "wrote " << a.out_path << " (" << ds.size() << " samples, "
              << nows::problem_name(ds.problem) << " n=" << ds.resolution
              << ")\n";
    return 0;
}

int cmd_train(const Args& a) {
    nows::RunConfig cfg = nows::parse_run_config(a.config_path);
    if (a.seed) {
        cfg.train.seed = *a.seed;
        cfg.model.init_seed = *a.seed + 1;
    }
    nows::Dataset ds = nows::load_dataset(a.data_path);
    nows::TrainHistory hist;
    if (cfg.model.kind == "mhno") {
        nows::MhnoModel m = nows::build_mhno(cfg, ds);
        hist = nows::train(m, ds, cfg.train);
        nows::save_model(m, a.out_path);
    } else {
        nows::FnoModel m = nows::build_fno(cfg, ds);
        hist = nows::train(m, ds, cfg.train);
        nows::save_model(m, a.out_path);
    }
    nlohmann::json jh;
    jh["epoch_loss"] = hist.epoch_loss;
    jh["best_loss"] = hist.best_loss;
    jh["lr"] = hist.lr;
    std::ofstream hout(a.out_path + ".history.json");
    hout << jh.dump(2) << "\n";
    std::cout << "wrote " << a.out_path << " (final loss "
              << (hist.best_loss.empty() ? 0.0 : hist.best_loss.back())
              << ")\n";
    return 0;
}

int cmd_bench(const Args& a) {
    nows::RunConfig cfg = nows::parse_run_config(a.config_path);
    if (a.seed) cfg.bench.seed = *a.seed;
    nows::ExperimentConfig ec = cfg.to_experiment(a.model_path);
    if (a.model_path.empty() && ec.initializer == "operator")
        ec.initializer = "zero";
    if (const char* env = std::getenv("NOWS_WORKERS"))
        ec.workers = std::max(1, std::atoi(env));
    std::optional<nows::Dataset> data;
    if (!a.data_path.empty()) data = nows::load_dataset(a.data_path);
    nows::ExperimentReport report =
        nows::run_experiment(ec, data ? &*data : nullptr);
    nows::emit_report(report, a.out_path);
    std::cout << "wrote " << a.out_path << "/report.json ("
              << report.records.size() << " records, median iter saving "
              << report.summary.median_iter_saving << "%)\n";
    return 0;
}

int cmd_report(const Args& a) {
    nows::ExperimentReport report = nows::read_report(a.report_in);
    nows::emit_plots(report, a.plots_dir);
    std::cout << "wrote plots to " << a.plots_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NOWS: neural-operator warm starts for Krylov solvers"};
    app.require_subcommand(1);
    Args args;

    CLI::App* gen = app.add_subcommand("gen", "Generate a dataset container");
    gen->add_option("--config", args.config_path, "run configuration JSON")
        ->required();
    gen->add_option("--out", args.out_path, "output dataset (.nows)")->required();
    gen->add_option("--seed", args.seed, "override the generation seed");

    CLI::App* train = app.add_subcommand("train", "Train a neural operator");
    train->add_option("--data", args.data_path, "dataset container")->required();
    train->add_option("--config", args.config_path, "run configuration JSON")
        ->required();
    train->add_option("--out", args.out_path, "output checkpoint (.nows)")
        ->required();
    train->add_option("--seed", args.seed, "override the training seed");

    CLI::App* bench = app.add_subcommand("bench", "Run the warm-start benchmark");
    bench->add_option("--data", args.data_path,
                      "benchmark on this dataset's samples (otherwise synthesized)");
    bench->add_option("--model", args.model_path, "operator checkpoint");
    bench->add_option("--config", args.config_path, "run configuration JSON")
        ->required();
    bench->add_option("--out", args.out_path, "output directory")->required();
    bench->add_option("--seed", args.seed, "override the benchmark seed");

    CLI::App* report = app.add_subcommand("report", "Render plots from a report");
    report->add_option("--in", args.report_in, "report.json path")->required();
    report->add_option("--plots", args.plots_dir, "plot output directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(args);
        if (train->parsed()) return cmd_train(args);
        if (bench->parsed()) return cmd_bench(args);
        if (report->parsed()) return cmd_report(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
