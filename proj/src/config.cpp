#include "nows/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nows {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::runtime_error("config: '" + path + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::runtime_error("config: unknown key '" + path + "." +
                                     it.key() + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace

bool RunConfig::boundary_mask_effective() const {
    if (model.boundary_mask >= 0) return model.boundary_mask != 0;
    return gen.problem == ProblemKind::poisson || gen.problem == ProblemKind::darcy;
}

RunConfig parse_run_config_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown(j, "$", {"problem", "grf", "model", "train", "solver", "bench"});
    RunConfig cfg;

    if (j.contains("problem")) {
        const json& p = j["problem"];
        reject_unknown(p, "problem",
                       {"kind", "n", "samples", "seed", "darcy", "burgers", "smoke"});
        cfg.gen.problem = problem_from_name(get_or<std::string>(p, "kind", "poisson"));
        cfg.gen.n = get_or(p, "n", cfg.gen.n);
        cfg.gen.samples = get_or(p, "samples", cfg.gen.samples);
        cfg.gen.seed = get_or<uint64_t>(p, "seed", cfg.gen.seed);
        if (p.contains("darcy")) {
            const json& d = p["darcy"];
            reject_unknown(d, "problem.darcy", {"mode", "alpha", "a_lo", "a_hi"});
            std::string mode = get_or<std::string>(d, "mode", "lognormal");
            if (mode == "lognormal")
                cfg.gen.darcy.mode = DarcyCoeffSpec::Mode::lognormal;
            else if (mode == "piecewise")
                cfg.gen.darcy.mode = DarcyCoeffSpec::Mode::piecewise;
            else
                throw std::runtime_error("config: problem.darcy.mode must be "
                                         "lognormal or piecewise");
            cfg.gen.darcy.alpha = get_or(d, "alpha", cfg.gen.darcy.alpha);
            cfg.gen.darcy.a_lo = get_or(d, "a_lo", cfg.gen.darcy.a_lo);
            cfg.gen.darcy.a_hi = get_or(d, "a_hi", cfg.gen.darcy.a_hi);
        }
        if (p.contains("burgers")) {
            const json& b = p["burgers"];
            reject_unknown(b, "problem.burgers", {"nu", "dt", "steps"});
            cfg.gen.burgers.nu = get_or(b, "nu", cfg.gen.burgers.nu);
            cfg.gen.burgers.dt = get_or(b, "dt", cfg.gen.burgers.dt);
            cfg.gen.burgers.n_steps = get_or(b, "steps", cfg.gen.burgers.n_steps);
        }
        if (p.contains("smoke")) {
            const json& s = p["smoke"];
            reject_unknown(s, "problem.smoke",
                           {"nu", "beta", "gravity", "diffusivity", "rho0", "dt",
                            "projection_tol", "warmup", "velocity_input"});
            cfg.gen.smoke.nu = get_or(s, "nu", cfg.gen.smoke.nu);
            cfg.gen.smoke.beta = get_or(s, "beta", cfg.gen.smoke.beta);
            cfg.gen.smoke.gravity = get_or(s, "gravity", cfg.gen.smoke.gravity);
            cfg.gen.smoke.diffusivity =
                get_or(s, "diffusivity", cfg.gen.smoke.diffusivity);
            cfg.gen.smoke.rho0 = get_or(s, "rho0", cfg.gen.smoke.rho0);
            cfg.gen.smoke.dt = get_or(s, "dt", cfg.gen.smoke.dt);
            cfg.gen.smoke.projection_tol =
                get_or(s, "projection_tol", cfg.gen.smoke.projection_tol);
            cfg.gen.smoke_warmup = get_or(s, "warmup", cfg.gen.smoke_warmup);
            cfg.gen.smoke_velocity_input =
                get_or(s, "velocity_input", cfg.gen.smoke_velocity_input);
        }
    }

    if (j.contains("grf")) {
        const json& g = j["grf"];
        reject_unknown(g, "grf", {"length_scale"});
        cfg.gen.grf_length_scale = get_or(g, "length_scale", cfg.gen.grf_length_scale);
    }

    if (j.contains("model")) {
        const json& m = j["model"];
        reject_unknown(m, "model",
                       {"kind", "modes", "width", "layers", "q_width", "h_width",
                        "coord_channels", "activation", "boundary_mask",
                        "init_seed"});
        cfg.model.kind = get_or<std::string>(m, "kind", cfg.model.kind);
        if (cfg.model.kind != "fno" && cfg.model.kind != "mhno")
            throw std::runtime_error("config: model.kind must be fno or mhno");
        cfg.model.modes = get_or(m, "modes", cfg.model.modes);
        cfg.model.width = get_or(m, "width", cfg.model.width);
        cfg.model.layers = get_or(m, "layers", cfg.model.layers);
        cfg.model.q_width = get_or(m, "q_width", cfg.model.q_width);
        cfg.model.h_width = get_or(m, "h_width", cfg.model.h_width);
        cfg.model.coord_channels =
            get_or(m, "coord_channels", cfg.model.coord_channels);
        cfg.model.activation = get_or<std::string>(m, "activation", cfg.model.activation);
        if (cfg.model.activation != "gelu" && cfg.model.activation != "identity")
            throw std::runtime_error("config: model.activation must be gelu or identity");
        if (m.contains("boundary_mask"))
            cfg.model.boundary_mask = m.at("boundary_mask").get<bool>() ? 1 : 0;
        cfg.model.init_seed = get_or<uint64_t>(m, "init_seed", cfg.model.init_seed);
    }

    if (j.contains("train")) {
        const json& t = j["train"];
        reject_unknown(t, "train",
                       {"batch_size", "lr", "epochs", "loss", "lambda",
                        "scheduler_factor", "scheduler_patience", "seed"});
        cfg.train.batch_size = get_or(t, "batch_size", cfg.train.batch_size);
        cfg.train.lr = get_or(t, "lr", cfg.train.lr);
        cfg.train.epochs = get_or(t, "epochs", cfg.train.epochs);
        cfg.train.loss = TrainConfig::loss_from_name(
            get_or<std::string>(t, "loss", "data"));
        cfg.train.lambda = get_or(t, "lambda", cfg.train.lambda);
        cfg.train.scheduler_factor =
            get_or(t, "scheduler_factor", cfg.train.scheduler_factor);
        cfg.train.scheduler_patience =
            get_or(t, "scheduler_patience", cfg.train.scheduler_patience);
        cfg.train.seed = get_or<uint64_t>(t, "seed", cfg.train.seed);
    }

    if (j.contains("solver")) {
        const json& s = j["solver"];
        reject_unknown(s, "solver",
                       {"method", "rel_tol", "abs_tol", "max_iters", "restart",
                        "omega"});
        cfg.solver.method = get_or<std::string>(s, "method", cfg.solver.method);
        if (cfg.solver.method != "cg" && cfg.solver.method != "gmres")
            throw std::runtime_error("config: solver.method must be cg or gmres");
        cfg.solver.rel_tol = get_or(s, "rel_tol", cfg.solver.rel_tol);
        cfg.solver.abs_tol = get_or(s, "abs_tol", cfg.solver.abs_tol);
        cfg.solver.max_iters = get_or(s, "max_iters", cfg.solver.max_iters);
        cfg.solver.restart = get_or(s, "restart", cfg.solver.restart);
        cfg.solver.omega = get_or(s, "omega", cfg.solver.omega);
    }

    if (j.contains("bench")) {
        const json& b = j["bench"];
        reject_unknown(b, "bench",
                       {"samples", "seed", "resolutions", "preconditioners",
                        "tolerances", "initializer", "perturbation", "workers",
                        "smoke_steps"});
        cfg.bench.samples = get_or(b, "samples", cfg.bench.samples);
        cfg.bench.seed = get_or<uint64_t>(b, "seed", cfg.bench.seed);
        cfg.bench.resolutions =
            get_or(b, "resolutions", cfg.bench.resolutions);
        cfg.bench.preconditioners =
            get_or(b, "preconditioners", cfg.bench.preconditioners);
        cfg.bench.tolerances = get_or(b, "tolerances", cfg.bench.tolerances);
        cfg.bench.initializer =
            get_or<std::string>(b, "initializer", cfg.bench.initializer);
        cfg.bench.perturbation = get_or(b, "perturbation", cfg.bench.perturbation);
        cfg.bench.workers = get_or(b, "workers", cfg.bench.workers);
        cfg.bench.smoke_steps = get_or(b, "smoke_steps", cfg.bench.smoke_steps);
    }

    cfg.gen.solver.rel_tol = cfg.solver.rel_tol;
    cfg.gen.solver.abs_tol = cfg.solver.abs_tol;
    cfg.gen.solver.max_iters = cfg.solver.max_iters;
    cfg.gen.solver.restart = cfg.solver.restart;
    cfg.gen.solver.record_trace = false;
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_run_config_text(text);
}

ExperimentConfig RunConfig::to_experiment(const std::string& model_path) const {
    ExperimentConfig e;
    e.problem = gen.problem;
    e.resolutions = bench.resolutions.empty() ? std::vector<int>{gen.n}
                                              : bench.resolutions;
    e.preconditioners.clear();
    for (const std::string& p : bench.preconditioners)
        e.preconditioners.push_back(precond_from_name(p));
    e.tolerances = bench.tolerances;
    e.samples = bench.samples;
    e.seed = bench.seed;
    e.model_path = model_path;
    e.initializer = bench.initializer;
    e.perturbation = bench.perturbation;
    e.solver = solver.method;
    e.max_iters = solver.max_iters;
    e.ssor_omega = solver.omega;
    e.workers = bench.workers;
    e.grf_length_scale = gen.grf_length_scale;
    e.darcy = gen.darcy;
    e.burgers = gen.burgers;
    e.burgers.n = e.resolutions[0];
    e.smoke = gen.smoke;
    e.smoke_steps = bench.smoke_steps;
    return e;
}

FnoModel build_fno(const RunConfig& cfg, const Dataset& ds) {
    FnoModel m;
    m.trunk.dims = ds.inputs.empty() || ds.inputs[0].dims == 2 ? 2 : 1;
    m.trunk.modes = cfg.model.modes;
    m.trunk.width = cfg.model.width;
    m.trunk.layers = cfg.model.layers;
    m.trunk.in_channels = ds.input_channels();
    m.trunk.coord_channels = cfg.model.coord_channels;
    m.trunk.act = cfg.model.activation == "identity" ? ad::Activation::identity
                                                     : ad::Activation::gelu;
    m.q_width = cfg.model.q_width;
    m.out_channels = 1;
    m.boundary_mask = cfg.boundary_mask_effective();
    m.init(cfg.model.init_seed);
    return m;
}

MhnoModel build_mhno(const RunConfig& cfg, const Dataset& ds) {
    MhnoModel m;
    m.trunk.dims = 1;
    m.trunk.modes = cfg.model.modes;
    m.trunk.width = cfg.model.width;
    m.trunk.layers = cfg.model.layers;
    m.trunk.in_channels = 1;
    m.trunk.coord_channels = cfg.model.coord_channels;
    m.trunk.act = cfg.model.activation == "identity" ? ad::Activation::identity
                                                     : ad::Activation::gelu;
    m.n_t = ds.burgers.n_steps;
    m.q_width = cfg.model.q_width;
    m.h_width = cfg.model.h_width;
    m.init(cfg.model.init_seed);
    return m;
}

}  // namespace nows
