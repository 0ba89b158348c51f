#include "nows/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "nows/burgers.hpp"
#include "nows/smoke.hpp"
#include "nows/train.hpp"

namespace nows {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{})
        throw std::runtime_error("bench: bad number in CSV: '" + s + "'");
    return v;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void fill_savings(BenchRecord& r, const NowsResult& nr) {
    r.iters_base = nr.baseline.iterations;
    r.iters_warm = nr.warmed.iterations;
    r.t_base = nr.baseline.core_time;
    r.t_warm = nr.warmed.core_time;
    r.inference_t = nr.inference_time;
    r.warm_start_error = nr.warm_start_error;
    r.converged_base = nr.baseline.converged;
    r.converged_warm = nr.warmed.converged;
    r.iter_saving = nr.iteration_saving;
    r.time_saving = nr.time_saving;
}

}  // namespace

void ExperimentConfig::check() const {
    if (resolutions.empty() || preconditioners.empty() || tolerances.empty())
        throw std::invalid_argument("ExperimentConfig: non-empty sweep lists required");
    if (samples < 1) throw std::invalid_argument("ExperimentConfig: samples >= 1");
    if (initializer != "zero" && initializer != "oracle" && initializer != "operator")
        throw std::invalid_argument("ExperimentConfig: unknown initializer '" +
                                    initializer + "'");
    if (initializer == "operator" && model_path.empty())
        throw std::invalid_argument("ExperimentConfig: operator initializer needs a model");
    if (solver != "cg" && solver != "gmres")
        throw std::invalid_argument("ExperimentConfig: solver must be cg or gmres");
}

double total_time_saving(const BenchRecord& r) {
    if (r.t_base <= 0.0) return 0.0;
    return 100.0 * (1.0 - (r.t_warm + r.inference_t) / r.t_base);
}

Stats summarize(const std::vector<BenchRecord>& records) {
    std::vector<double> iter_sv, time_sv, total_sv, errs;
    int64_t failures = 0;
    for (const auto& r : records) {
        if (r.converged_base && r.converged_warm) {
            iter_sv.push_back(r.iter_saving);
            time_sv.push_back(r.time_saving);
            total_sv.push_back(total_time_saving(r));
            errs.push_back(r.warm_start_error);
        } else {
            ++failures;
        }
    }
    if (iter_sv.empty())
        throw std::runtime_error("summarize: zero converged records");
    Stats s;
    s.converged = static_cast<int64_t>(iter_sv.size());
    s.failures = failures;
    auto mean = [](const std::vector<double>& v) {
        double acc = 0.0;
        for (double t : v) acc += t;
        return acc / static_cast<double>(v.size());
    };
    s.mean_iter_saving = mean(iter_sv);
    s.median_iter_saving = median_of(iter_sv);
    s.min_iter_saving = *std::min_element(iter_sv.begin(), iter_sv.end());
    s.max_iter_saving = *std::max_element(iter_sv.begin(), iter_sv.end());
    s.mean_time_saving = mean(time_sv);
    s.median_time_saving = median_of(time_sv);
    s.min_time_saving = *std::min_element(time_sv.begin(), time_sv.end());
    s.max_time_saving = *std::max_element(time_sv.begin(), time_sv.end());
    s.mean_total_time_saving = mean(total_sv);

    // Pearson r between warm-start error and iteration saving.
    double mx = mean(errs), my = mean(iter_sv);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < errs.size(); ++i) {
        double dx = errs[i] - mx, dy = iter_sv[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    s.pearson_r = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    return s;
}

namespace {

ExperimentReport run_static(const ExperimentConfig& cfg, const Dataset* data,
                            FnoModel* model) {
    ExperimentReport report;
    report.config = cfg;
    KrylovOpts ref_opts{1e-12, 0.0, 200000, 30, false};

    for (int res : cfg.resolutions) {
        // Instances for this resolution (dataset-backed runs only make sense
        // at the dataset's own resolution).
        std::vector<ProblemInstance> instances;
        instances.reserve(cfg.samples);
        if (data != nullptr) {
            if (res != data->resolution)
                throw std::invalid_argument(
                    "run_experiment: dataset resolution does not match sweep");
            if (static_cast<size_t>(cfg.samples) > data->size())
                throw std::invalid_argument(
                    "run_experiment: dataset smaller than requested samples");
            for (int s = 0; s < cfg.samples; ++s)
                instances.push_back(instance_from_sample(*data, s));
        } else {
            for (int s = 0; s < cfg.samples; ++s)
                instances.push_back(make_instance(
                    cfg.problem, res, cfg.grf_length_scale, cfg.darcy,
                    cfg.seed + static_cast<uint64_t>(s), ref_opts, true));
        }

        for (PrecondKind pk : cfg.preconditioners) {
            std::vector<Preconditioner> preconds;
            preconds.reserve(instances.size());
            for (const auto& inst : instances)
                preconds.push_back(make_preconditioner(inst.A, pk, cfg.ssor_omega));

            for (double tol : cfg.tolerances) {
                KrylovOpts opts;
                opts.rel_tol = tol;
                opts.abs_tol = 0.0;
                opts.max_iters = cfg.max_iters;
                const bool gmres = cfg.solver == "gmres";

                auto make_init = [&](int s) {
                    if (cfg.initializer == "zero") return Initializer::zero();
                    if (cfg.initializer == "oracle")
                        return Initializer::oracle(cfg.perturbation,
                                                   cfg.seed + 7777 + s);
                    return Initializer::op(*model);
                };
                // Warm-up solve, discarded, to stabilize timings.
                (void)warm_start_solve(instances[0], make_init(0), preconds[0],
                                       opts, gmres);

                std::vector<BenchRecord> recs(instances.size());
                std::vector<NowsResult> results(instances.size());
                auto work = [&](size_t lo, size_t hi) {
                    for (size_t s = lo; s < hi; ++s)
                        results[s] = warm_start_solve(instances[s], make_init(s),
                                                      preconds[s], opts, gmres);
                };
                int workers = std::max(1, cfg.workers);
                if (workers == 1 || instances.size() < 2) {
                    work(0, instances.size());
                } else {
                    std::vector<std::thread> pool;
                    size_t chunk =
                        (instances.size() + workers - 1) / static_cast<size_t>(workers);
                    for (size_t lo = 0; lo < instances.size(); lo += chunk)
                        pool.emplace_back(work, lo,
                                          std::min(instances.size(), lo + chunk));
                    for (auto& t : pool) t.join();
                }
                for (size_t s = 0; s < instances.size(); ++s) {
                    BenchRecord& r = recs[s];
                    r.sample = static_cast<int64_t>(s);
                    r.resolution = res;
                    r.preconditioner = precond_name(pk);
                    r.tolerance = tol;
                    fill_savings(r, results[s]);
                }
                TracePair tp;
                tp.resolution = res;
                tp.preconditioner = precond_name(pk);
                tp.tolerance = tol;
                tp.baseline = results[0].baseline.residual_trace;
                tp.warmed = results[0].warmed.residual_trace;
                report.traces.push_back(std::move(tp));
                report.records.insert(report.records.end(), recs.begin(), recs.end());
            }
        }
    }
    report.summary = summarize(report.records);
    return report;
}

ExperimentReport run_burgers(const ExperimentConfig& cfg, MhnoModel& model) {
    ExperimentReport report;
    report.config = cfg;
    BurgersCfg bc = cfg.burgers;
    bc.n = cfg.resolutions[0];
    bc.n_steps = model.n_t;
    bc.check();
    CsrMatrix Adiff = burgers_diffusion_matrix(bc);
    Preconditioner M;  // plain CG on the diffusion system
    KrylovOpts opts;
    opts.rel_tol = cfg.tolerances[0];
    opts.max_iters = cfg.max_iters;

    int64_t rec_id = 0;
    for (int t = 0; t < cfg.samples; ++t) {
        GridField u0 = sample_grf_periodic_1d(bc.n, cfg.grf_length_scale,
                                              cfg.seed + static_cast<uint64_t>(t));
        auto t0 = std::chrono::steady_clock::now();
        std::vector<GridField> preds = mhno_forward(model, u0);
        double infer_total =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        double infer_share = infer_total / bc.n_steps;

        GridField u = u0;
        for (int s = 0; s < bc.n_steps; ++s) {
            std::vector<double> zeros(bc.n, 0.0);
            auto hook = [&](const CsrMatrix& A, std::span<const double> b,
                            std::span<const double> x0) {
                return cg_solve(A, b, x0, M, opts);
            };
            BurgersStepResult cold = burgers_step(u, bc, Adiff, hook, zeros);
            BurgersStepResult warm = burgers_step(u, bc, Adiff, hook, preds[s].data);
            BenchRecord r;
            r.sample = rec_id++;
            r.resolution = bc.n;
            r.preconditioner = "none";
            r.tolerance = opts.rel_tol;
            NowsResult nr;
            nr.baseline = cold.solve;
            nr.warmed = warm.solve;
            nr.inference_time = infer_share;
            nr.warm_start_error = rel_l2_error(preds[s].data, cold.u.data);
            nr.both_converged = cold.solve.converged && warm.solve.converged;
            if (nr.both_converged && cold.solve.iterations > 0)
                nr.iteration_saving =
                    100.0 * (1.0 - static_cast<double>(warm.solve.iterations) /
                                       cold.solve.iterations);
            if (nr.both_converged && cold.solve.core_time > 0.0)
                nr.time_saving =
                    100.0 * (1.0 - warm.solve.core_time / cold.solve.core_time);
            fill_savings(r, nr);
            report.records.push_back(std::move(r));
            if (t == 0 && s == 0) {
                TracePair tp;
                tp.resolution = bc.n;
                tp.preconditioner = "none";
                tp.tolerance = opts.rel_tol;
                tp.baseline = cold.solve.residual_trace;
                tp.warmed = warm.solve.residual_trace;
                report.traces.push_back(std::move(tp));
            }
            u = cold.u;
        }
    }
    report.summary = summarize(report.records);
    return report;
}

ExperimentReport run_smoke(const ExperimentConfig& cfg, FnoModel& model) {
    ExperimentReport report;
    report.config = cfg;
    const int m = cfg.resolutions[0];
    SmokeParams sp = cfg.smoke;
    sp.check();
    SmokeOps ops = make_smoke_ops(m);
    SmokeState state = smoke_initial_state(m, sp);
    KrylovOpts opts;
    opts.rel_tol = 1e-30;  // replaced by the divergence-derived abs_tol
    opts.max_iters = cfg.max_iters;

    for (int s = 0; s < cfg.smoke_steps; ++s) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<const GridField*> ch{&state.p};
        if (model.trunk.in_channels == 3) {
            ch.push_back(&state.u);
            ch.push_back(&state.v);
        }
        GridField pred = fno_forward(model, ch);
        double infer =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();

        SmokeStepResult cold = smoke_step(state, sp, ops, {}, opts);
        SmokeStepResult warm = smoke_step(state, sp, ops, pred.data, opts);

        BenchRecord r;
        r.sample = s;
        r.resolution = m;
        r.preconditioner = "none";
        r.tolerance = sp.projection_tol;
        NowsResult nr;
        nr.baseline = cold.projection;
        nr.warmed = warm.projection;
        nr.inference_time = infer;
        nr.warm_start_error = rel_l2_error(pred.data, cold.projection.x);
        nr.both_converged =
            cold.projection.converged && warm.projection.converged;
        if (nr.both_converged && cold.projection.iterations > 0)
            nr.iteration_saving =
                100.0 * (1.0 - static_cast<double>(warm.projection.iterations) /
                                   cold.projection.iterations);
        if (nr.both_converged && cold.projection.core_time > 0.0)
            nr.time_saving = 100.0 * (1.0 - warm.projection.core_time /
                                                cold.projection.core_time);
        fill_savings(r, nr);
        report.records.push_back(std::move(r));
        if (s == 0) {
            TracePair tp;
            tp.resolution = m;
            tp.preconditioner = "none";
            tp.tolerance = sp.projection_tol;
            tp.baseline = cold.projection.residual_trace;
            tp.warmed = warm.projection.residual_trace;
            report.traces.push_back(std::move(tp));
        }
        state = std::move(cold.state);
    }
    report.summary = summarize(report.records);
    return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset* data) {
    cfg.check();
    FnoModel fno;
    MhnoModel mhno;
    bool want_model = cfg.initializer == "operator";
    if (want_model) {
        std::string kind = model_kind(cfg.model_path);
        if (kind == "fno")
            fno = load_fno(cfg.model_path);
        else
            mhno = load_mhno(cfg.model_path);
    }
    switch (cfg.problem) {
        case ProblemKind::poisson:
        case ProblemKind::darcy:
            return run_static(cfg, data, want_model ? &fno : nullptr);
        case ProblemKind::burgers:
            if (!want_model)
                throw std::invalid_argument(
                    "run_experiment: burgers sweep needs an operator initializer");
            return run_burgers(cfg, mhno);
        case ProblemKind::smoke:
            if (!want_model)
                throw std::invalid_argument(
                    "run_experiment: smoke sweep needs an operator initializer");
            return run_smoke(cfg, fno);
    }
    throw std::logic_error("run_experiment: unreachable");
}

namespace {

nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["problem"] = problem_name(c.problem);
    j["resolutions"] = c.resolutions;
    std::vector<std::string> pk;
    for (PrecondKind k : c.preconditioners) pk.emplace_back(precond_name(k));
    j["preconditioners"] = pk;
    j["tolerances"] = c.tolerances;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["model_path"] = c.model_path;
    j["initializer"] = c.initializer;
    j["perturbation"] = c.perturbation;
    j["solver"] = c.solver;
    j["max_iters"] = c.max_iters;
    j["ssor_omega"] = c.ssor_omega;
    j["workers"] = c.workers;
    j["grf_length_scale"] = c.grf_length_scale;
    j["smoke_steps"] = c.smoke_steps;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.problem = problem_from_name(j.at("problem").get<std::string>());
    c.resolutions = j.at("resolutions").get<std::vector<int>>();
    c.preconditioners.clear();
    for (const auto& name : j.at("preconditioners"))
        c.preconditioners.push_back(precond_from_name(name.get<std::string>()));
    c.tolerances = j.at("tolerances").get<std::vector<double>>();
    c.samples = j.at("samples").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.model_path = j.at("model_path").get<std::string>();
    c.initializer = j.at("initializer").get<std::string>();
    c.perturbation = j.at("perturbation").get<double>();
    c.solver = j.at("solver").get<std::string>();
    c.max_iters = j.at("max_iters").get<int>();
    c.ssor_omega = j.at("ssor_omega").get<double>();
    c.workers = j.at("workers").get<int>();
    c.grf_length_scale = j.at("grf_length_scale").get<double>();
    c.smoke_steps = j.at("smoke_steps").get<int>();
    return c;
}

nlohmann::json stats_json(const Stats& s) {
    nlohmann::json j;
    j["converged"] = s.converged;
    j["failures"] = s.failures;
    j["mean_iter_saving"] = s.mean_iter_saving;
    j["median_iter_saving"] = s.median_iter_saving;
    j["min_iter_saving"] = s.min_iter_saving;
    j["max_iter_saving"] = s.max_iter_saving;
    j["mean_time_saving"] = s.mean_time_saving;
    j["median_time_saving"] = s.median_time_saving;
    j["min_time_saving"] = s.min_time_saving;
    j["max_time_saving"] = s.max_time_saving;
    j["mean_total_time_saving"] = s.mean_total_time_saving;
    j["pearson_r"] = s.pearson_r;
    return j;
}

Stats stats_from_json(const nlohmann::json& j) {
    Stats s;
    s.converged = j.at("converged").get<int64_t>();
    s.failures = j.at("failures").get<int64_t>();
    s.mean_iter_saving = j.at("mean_iter_saving").get<double>();
    s.median_iter_saving = j.at("median_iter_saving").get<double>();
    s.min_iter_saving = j.at("min_iter_saving").get<double>();
    s.max_iter_saving = j.at("max_iter_saving").get<double>();
    s.mean_time_saving = j.at("mean_time_saving").get<double>();
    s.median_time_saving = j.at("median_time_saving").get<double>();
    s.min_time_saving = j.at("min_time_saving").get<double>();
    s.max_time_saving = j.at("max_time_saving").get<double>();
    s.mean_total_time_saving = j.at("mean_total_time_saving").get<double>();
    s.pearson_r = j.at("pearson_r").get<double>();
    return s;
}

constexpr const char* kCsvHeader =
    "sample,resolution,preconditioner,tolerance,iters_base,iters_warm,t_base,"
    "t_warm,inference_t,warm_start_error,iter_saving,time_saving,converged_"
    "base,converged_warm";

}  // namespace

void emit_report(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["config"] = config_json(report.config);
    j["summary"] = stats_json(report.summary);
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : report.records) {
        nlohmann::json jr;
        jr["sample"] = r.sample;
        jr["resolution"] = r.resolution;
        jr["preconditioner"] = r.preconditioner;
        jr["tolerance"] = r.tolerance;
        jr["iters_base"] = r.iters_base;
        jr["iters_warm"] = r.iters_warm;
        jr["t_base"] = r.t_base;
        jr["t_warm"] = r.t_warm;
        jr["inference_t"] = r.inference_t;
        jr["warm_start_error"] = r.warm_start_error;
        jr["iter_saving"] = r.iter_saving;
        jr["time_saving"] = r.time_saving;
        jr["converged_base"] = r.converged_base;
        jr["converged_warm"] = r.converged_warm;
        recs.push_back(std::move(jr));
    }
    j["records"] = std::move(recs);
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : report.traces) {
        nlohmann::json jt;
        jt["resolution"] = t.resolution;
        jt["preconditioner"] = t.preconditioner;
        jt["tolerance"] = t.tolerance;
        jt["baseline"] = t.baseline;
        jt["warmed"] = t.warmed;
        traces.push_back(std::move(jt));
    }
    j["traces"] = std::move(traces);

    std::ofstream out(dir + "/report.json");
    if (!out) throw std::runtime_error("emit_report: cannot write report.json");
    out << j.dump(2) << "\n";

    std::ofstream csv(dir + "/records.csv");
    if (!csv) throw std::runtime_error("emit_report: cannot write records.csv");
    csv << kCsvHeader << "\n";
    for (const auto& r : report.records) {
        csv << r.sample << ',' << r.resolution << ',' << r.preconditioner << ','
            << fmt_double(r.tolerance) << ',' << r.iters_base << ','
            << r.iters_warm << ',' << fmt_double(r.t_base) << ','
            << fmt_double(r.t_warm) << ',' << fmt_double(r.inference_t) << ','
            << fmt_double(r.warm_start_error) << ',' << fmt_double(r.iter_saving)
            << ',' << fmt_double(r.time_saving) << ',' << (r.converged_base ? 1 : 0)
            << ',' << (r.converged_warm ? 1 : 0) << "\n";
    }
}

ExperimentReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_report: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    ExperimentReport report;
    report.config = config_from_json(j.at("config"));
    report.summary = stats_from_json(j.at("summary"));
    for (const auto& jr : j.at("records")) {
        BenchRecord r;
        r.sample = jr.at("sample").get<int64_t>();
        r.resolution = jr.at("resolution").get<int>();
        r.preconditioner = jr.at("preconditioner").get<std::string>();
        r.tolerance = jr.at("tolerance").get<double>();
        r.iters_base = jr.at("iters_base").get<int64_t>();
        r.iters_warm = jr.at("iters_warm").get<int64_t>();
        r.t_base = jr.at("t_base").get<double>();
        r.t_warm = jr.at("t_warm").get<double>();
        r.inference_t = jr.at("inference_t").get<double>();
        r.warm_start_error = jr.at("warm_start_error").get<double>();
        r.iter_saving = jr.at("iter_saving").get<double>();
        r.time_saving = jr.at("time_saving").get<double>();
        r.converged_base = jr.at("converged_base").get<bool>();
        r.converged_warm = jr.at("converged_warm").get<bool>();
        report.records.push_back(std::move(r));
    }
    for (const auto& jt : j.at("traces")) {
        TracePair t;
        t.resolution = jt.at("resolution").get<int>();
        t.preconditioner = jt.at("preconditioner").get<std::string>();
        t.tolerance = jt.at("tolerance").get<double>();
        t.baseline = jt.at("baseline").get<std::vector<double>>();
        t.warmed = jt.at("warmed").get<std::vector<double>>();
        report.traces.push_back(std::move(t));
    }
    return report;
}

std::vector<BenchRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_records_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("read_records_csv: unexpected header");
    std::vector<BenchRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 14)
            throw std::runtime_error("read_records_csv: bad row: " + line);
        BenchRecord r;
        r.sample = std::stoll(cells[0]);
        r.resolution = std::stoi(cells[1]);
        r.preconditioner = cells[2];
        r.tolerance = parse_double(cells[3]);
        r.iters_base = std::stoll(cells[4]);
        r.iters_warm = std::stoll(cells[5]);
        r.t_base = parse_double(cells[6]);
        r.t_warm = parse_double(cells[7]);
        r.inference_t = parse_double(cells[8]);
        r.warm_start_error = parse_double(cells[9]);
        r.iter_saving = parse_double(cells[10]);
        r.time_saving = parse_double(cells[11]);
        r.converged_base = cells[12] == "1";
        r.converged_warm = cells[13] == "1";
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

struct SvgCanvas {
    std::ostringstream body;
    double width = 640, height = 420;

    std::string finish() {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
            << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
            << height << "\">\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

void svg_write(const std::string& path, SvgCanvas& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_plots: cannot write " + path);
    out << c.finish();
}

void svg_text(SvgCanvas& c, double x, double y, const std::string& t,
              int size = 12) {
    c.body << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
           << "\" font-family=\"sans-serif\">" << t << "</text>\n";
}

void svg_polyline(SvgCanvas& c, const std::vector<std::pair<double, double>>& pts,
                  const std::string& color) {
    c.body << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) c.body << x << "," << y << " ";
    c.body << "\"/>\n";
}

std::string tol_tag(double tol) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", tol);
    return buf;
}

}  // namespace

void emit_plots(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const double ml = 60, mr = 20, mt = 30, mb = 45;

    for (const auto& t : report.traces) {
        SvgCanvas c;
        const double w = c.width - ml - mr, h = c.height - mt - mb;
        size_t maxlen = std::max(t.baseline.size(), t.warmed.size());
        if (maxlen < 2) maxlen = 2;
        double lo = 1e300, hi = -1e300;
        for (const auto* tr : {&t.baseline, &t.warmed})
            for (double v : *tr) {
                double lv = std::log10(std::max(v, 1e-18));
                lo = std::min(lo, lv);
                hi = std::max(hi, lv);
            }
        if (hi <= lo) hi = lo + 1.0;
        auto map = [&](size_t i, double v) {
            double x = ml + w * static_cast<double>(i) / (maxlen - 1);
            double lv = std::log10(std::max(v, 1e-18));
            double y = mt + h * (hi - lv) / (hi - lo);
            return std::pair<double, double>(x, y);
        };
        c.body << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w
               << "\" height=\"" << h
               << "\" fill=\"none\" stroke=\"black\"/>\n";
        std::vector<std::pair<double, double>> pts;
        for (size_t i = 0; i < t.baseline.size(); ++i)
            pts.push_back(map(i, t.baseline[i]));
        svg_polyline(c, pts, "#d95f02");
        pts.clear();
        for (size_t i = 0; i < t.warmed.size(); ++i)
            pts.push_back(map(i, t.warmed[i]));
        svg_polyline(c, pts, "#1f77b4");
        svg_text(c, ml, mt - 10,
                 "true residual vs iteration (log y), n=" +
                     std::to_string(t.resolution) + ", " + t.preconditioner +
                     ", tol=" + tol_tag(t.tolerance));
        svg_text(c, ml, c.height - 12, "orange: cold start   blue: warm start");
        svg_write(dir + "/residual_n" + std::to_string(t.resolution) + "_" +
                      t.preconditioner + "_tol" + tol_tag(t.tolerance) + ".svg",
                  c);
    }

    {
        // Savings histogram over converged records.
        std::vector<double> sv;
        for (const auto& r : report.records)
            if (r.converged_base && r.converged_warm) sv.push_back(r.iter_saving);
        SvgCanvas c;
        const double w = c.width - ml - mr, h = c.height - mt - mb;
        const int bins = 20;
        double lo = -5.0, hi = 100.0;
        if (!sv.empty()) {
            lo = std::min(lo, *std::min_element(sv.begin(), sv.end()));
            hi = std::max(hi, *std::max_element(sv.begin(), sv.end()));
        }
        std::vector<int> count(bins, 0);
        for (double v : sv) {
            int b = static_cast<int>((v - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            count[b]++;
        }
        int peak = 1;
        for (int v : count) peak = std::max(peak, v);
        c.body << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w
               << "\" height=\"" << h << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int b = 0; b < bins; ++b) {
            double bw = w / bins;
            double bh = h * count[b] / peak;
            c.body << "<rect x=\"" << ml + b * bw << "\" y=\"" << mt + h - bh
                   << "\" width=\"" << bw * 0.9 << "\" height=\"" << bh
                   << "\" fill=\"#1f77b4\"/>\n";
        }
        svg_text(c, ml, mt - 10, "iteration-saving histogram (%)");
        svg_text(c, ml, c.height - 12,
                 tol_tag(lo) + "% .. " + tol_tag(hi) + "%, " +
                     std::to_string(sv.size()) + " converged records");
        svg_write(dir + "/savings_hist.svg", c);
    }

    {
        // Mean runtime per configuration: cold vs warm bars.
        struct Row {
            std::string label;
            double base = 0.0, warm = 0.0;
            int n = 0;
        };
        std::vector<Row> rows;
        for (const auto& r : report.records) {
            if (!(r.converged_base && r.converged_warm)) continue;
            std::string label = "n" + std::to_string(r.resolution) + " " +
                                r.preconditioner + " tol" + tol_tag(r.tolerance);
            auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const Row& x) { return x.label == label; });
            if (it == rows.end()) {
                rows.push_back({label, r.t_base, r.t_warm, 1});
            } else {
                it->base += r.t_base;
                it->warm += r.t_warm;
                it->n += 1;
            }
        }
        SvgCanvas c;
        const double w = c.width - ml - mr - 160, h = c.height - mt - mb;
        double peak = 1e-12;
        for (auto& row : rows) {
            row.base /= std::max(1, row.n);
            row.warm /= std::max(1, row.n);
            peak = std::max({peak, row.base, row.warm});
        }
        double rh = rows.empty() ? h : h / rows.size();
        for (size_t i = 0; i < rows.size(); ++i) {
            double y = mt + i * rh;
            double b1 = w * rows[i].base / peak;
            double b2 = w * rows[i].warm / peak;
            c.body << "<rect x=\"" << ml << "\" y=\"" << y + rh * 0.15
                   << "\" width=\"" << b1 << "\" height=\"" << rh * 0.3
                   << "\" fill=\"#d95f02\"/>\n";
            c.body << "<rect x=\"" << ml << "\" y=\"" << y + rh * 0.55
                   << "\" width=\"" << b2 << "\" height=\"" << rh * 0.3
                   << "\" fill=\"#1f77b4\"/>\n";
            svg_text(c, ml + w + 8, y + rh * 0.6, rows[i].label, 10);
        }
        svg_text(c, ml, mt - 10,
                 "mean solver core time per config (orange: cold, blue: warm)");
        svg_write(dir + "/runtime_summary.svg", c);
    }
}

}  // namespace nows
