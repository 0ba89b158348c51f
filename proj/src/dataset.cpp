#include "nows/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nows/container.hpp"

namespace nows {

namespace {

void mean_std(const std::vector<GridField>& fields, double& mean, double& sd) {
    double sum = 0.0;
    size_t count = 0;
    for (const auto& f : fields) {
        for (double v : f.data) sum += v;
        count += f.data.size();
    }
    mean = count ? sum / static_cast<double>(count) : 0.0;
    double ss = 0.0;
    for (const auto& f : fields)
        for (double v : f.data) ss += (v - mean) * (v - mean);
    sd = count ? std::sqrt(ss / static_cast<double>(count)) : 1.0;
    if (sd < 1e-12) sd = 1e-12;  // keeps the std > 0 invariant for flat data
}

double rel_residual(const CsrMatrix& A, std::span<const double> x,
                    std::span<const double> b) {
    std::vector<double> r = spmv(A, x);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        double d = b[i] - r[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return std::sqrt(num) / (den > 0.0 ? std::sqrt(den) : 1.0);
}

[[noreturn]] void abort_sample(size_t i, const std::string& why) {
    throw std::runtime_error("generate_dataset: sample " + std::to_string(i) +
                             " " + why);
}

GridField embed_nodal(const std::vector<double>& interior, int n) {
    // Interior (n-1)^2 values -> full (n+1)^2 nodal grid with the zero
    // Dirichlet ring, h = 1/n.
    const double h = 1.0 / n;
    GridField f = GridField::make_2d(n + 1, n + 1, h, h, 0.0, 0.0);
    for (int iy = 1; iy < n; ++iy)
        for (int ix = 1; ix < n; ++ix)
            f.at(iy, ix) = interior[(iy - 1) * (n - 1) + (ix - 1)];
    return f;
}

}  // namespace

void Dataset::check() const {
    if (inputs.size() != outputs.size())
        throw std::invalid_argument("Dataset: inputs/outputs length mismatch");
    if (velocity_input &&
        (inputs_u.size() != inputs.size() || inputs_v.size() != inputs.size()))
        throw std::invalid_argument("Dataset: velocity channels length mismatch");
    if (in_mean.size() != in_std.size() ||
        in_mean.size() != static_cast<size_t>(input_channels()))
        throw std::invalid_argument("Dataset: stats/channel mismatch");
    for (double s : in_std)
        if (!(s > 0.0)) throw std::invalid_argument("Dataset: std must be > 0");
    if (!(out_std > 0.0))
        throw std::invalid_argument("Dataset: std must be > 0");
}

ProblemInstance make_instance(ProblemKind kind, int n, double grf_length_scale,
                              const DarcyCoeffSpec& darcy, uint64_t seed,
                              const KrylovOpts& solver, bool with_reference) {
    if (kind == ProblemKind::poisson) {
        ProblemInstance inst = assemble_poisson_fd(n);
        const double h = 1.0 / (n + 1);
        GridField p = sample_grf_on(n, n, h, grf_length_scale, seed);
        p.origin = {h, h};
        inst.input_field = p;
        inst.b = p.data;
        if (with_reference) {
            std::vector<double> x0(inst.b.size(), 0.0);
            SolveResult sr = cg_solve(inst.A, inst.b, x0, Preconditioner{}, solver);
            if (!sr.converged)
                throw std::runtime_error("make_instance: reference solve failed");
            inst.reference = std::move(sr.x);
        }
        return inst;
    }
    if (kind == ProblemKind::darcy) {
        const double h = 1.0 / n;
        GridField g = sample_grf_on(n + 1, n + 1, h, grf_length_scale, seed);
        GridField a_nodal = darcy_coefficient(g, darcy);
        ProblemInstance inst = assemble_darcy_fem(element_average(a_nodal), n);
        inst.input_field = a_nodal;
        if (with_reference) {
            std::vector<double> x0(inst.b.size(), 0.0);
            Preconditioner M = make_preconditioner(inst.A, PrecondKind::ic0);
            SolveResult sr = cg_solve(inst.A, inst.b, x0, M, solver);
            if (!sr.converged)
                throw std::runtime_error("make_instance: reference solve failed");
            inst.reference = std::move(sr.x);
        }
        return inst;
    }
    throw std::invalid_argument(
        "make_instance: only static problems (poisson, darcy) have single instances");
}

Dataset generate_dataset(const GenConfig& cfg) {
    if (cfg.samples < 1)
        throw std::invalid_argument("generate_dataset: samples >= 1");
    Dataset ds;
    ds.problem = cfg.problem;
    ds.resolution = cfg.n;
    ds.seed = cfg.seed;
    ds.grf_length_scale = cfg.grf_length_scale;
    ds.darcy = cfg.darcy;
    ds.burgers = cfg.burgers;
    ds.smoke = cfg.smoke;
    ds.velocity_input = cfg.problem == ProblemKind::smoke && cfg.smoke_velocity_input;

    switch (cfg.problem) {
        case ProblemKind::poisson:
        case ProblemKind::darcy: {
            for (int i = 0; i < cfg.samples; ++i) {
                ProblemInstance inst =
                    make_instance(cfg.problem, cfg.n, cfg.grf_length_scale,
                                  cfg.darcy, cfg.seed + static_cast<uint64_t>(i),
                                  cfg.solver, true);
                if (rel_residual(inst.A, *inst.reference, inst.b) > 1e-10)
                    abort_sample(i, "failed the residual check");
                ds.inputs.push_back(inst.input_field);
                if (cfg.problem == ProblemKind::poisson) {
                    GridField out = inst.solution_grid;
                    out.data = *inst.reference;
                    ds.outputs.push_back(std::move(out));
                } else {
                    ds.outputs.push_back(embed_nodal(*inst.reference, cfg.n));
                }
            }
            break;
        }
        case ProblemKind::burgers: {
            BurgersCfg bc = cfg.burgers;
            bc.n = cfg.n;
            bc.check();
            CsrMatrix Adiff = burgers_diffusion_matrix(bc);
            for (int i = 0; i < cfg.samples; ++i) {
                GridField u0 = sample_grf_periodic_1d(
                    bc.n, cfg.grf_length_scale, cfg.seed + static_cast<uint64_t>(i));
                GridField traj = GridField::make_2d(bc.n_steps, bc.n, bc.dt,
                                                    1.0 / bc.n, bc.dt, 0.0);
                GridField u = u0;
                for (int s = 0; s < bc.n_steps; ++s) {
                    BurgersStepResult step = burgers_step(u, bc, Adiff, cfg.solver);
                    if (!step.solve.converged)
                        abort_sample(i, "diffusion solve did not converge at step " +
                                            std::to_string(s));
                    u = step.u;
                    for (int j = 0; j < bc.n; ++j) traj.at(s, j) = u.data[j];
                }
                ds.inputs.push_back(std::move(u0));
                ds.outputs.push_back(std::move(traj));
            }
            break;
        }
        case ProblemKind::smoke: {
            SmokeParams sp = cfg.smoke;
            sp.check();
            SmokeOps ops = make_smoke_ops(cfg.n);
            SmokeState state = smoke_initial_state(cfg.n, sp);
            KrylovOpts opts = cfg.solver;
            const int total = cfg.smoke_warmup + cfg.samples + 1;
            std::vector<GridField> pressures;
            std::vector<GridField> us, vs;
            for (int s = 0; s < total; ++s) {
                SmokeStepResult step = smoke_step(state, sp, ops, {}, opts);
                if (!step.projection.converged)
                    abort_sample(0, "projection did not converge at step " +
                                        std::to_string(s));
                state = std::move(step.state);
                pressures.push_back(state.p);
                us.push_back(state.u);
                vs.push_back(state.v);
            }
            for (int i = 0; i < cfg.samples; ++i) {
                int t = cfg.smoke_warmup + i;
                ds.inputs.push_back(pressures[t]);
                ds.outputs.push_back(pressures[t + 1]);
                if (ds.velocity_input) {
                    ds.inputs_u.push_back(us[t]);
                    ds.inputs_v.push_back(vs[t]);
                }
            }
            break;
        }
    }

    ds.in_mean.resize(ds.input_channels());
    ds.in_std.resize(ds.input_channels());
    mean_std(ds.inputs, ds.in_mean[0], ds.in_std[0]);
    if (ds.velocity_input) {
        mean_std(ds.inputs_u, ds.in_mean[1], ds.in_std[1]);
        mean_std(ds.inputs_v, ds.in_mean[2], ds.in_std[2]);
    }
    mean_std(ds.outputs, ds.out_mean, ds.out_std);
    ds.check();
    return ds;
}

ProblemInstance instance_from_sample(const Dataset& ds, size_t i) {
    if (i >= ds.size())
        throw std::out_of_range("instance_from_sample: index out of range");
    if (ds.problem == ProblemKind::poisson) {
        ProblemInstance inst = assemble_poisson_fd(ds.resolution);
        inst.input_field = ds.inputs[i];
        inst.b = ds.inputs[i].data;
        inst.reference = ds.outputs[i].data;
        return inst;
    }
    if (ds.problem == ProblemKind::darcy) {
        ProblemInstance inst =
            assemble_darcy_fem(element_average(ds.inputs[i]), ds.resolution);
        inst.input_field = ds.inputs[i];
        const int ni = ds.resolution - 1;
        std::vector<double> interior(static_cast<size_t>(ni) * ni);
        for (int iy = 1; iy < ds.resolution; ++iy)
            for (int ix = 1; ix < ds.resolution; ++ix)
                interior[(iy - 1) * ni + (ix - 1)] = ds.outputs[i].at(iy, ix);
        inst.reference = std::move(interior);
        return inst;
    }
    throw std::invalid_argument("instance_from_sample: static problems only");
}

namespace {

std::vector<int64_t> stack_shape(const std::vector<GridField>& fs) {
    int64_t n = static_cast<int64_t>(fs.size());
    if (fs.empty()) return {0};
    if (fs[0].dims == 1) return {n, fs[0].shape[0]};
    return {n, fs[0].shape[0], fs[0].shape[1]};
}

std::vector<double> stack_data(const std::vector<GridField>& fs) {
    std::vector<double> out;
    for (const auto& f : fs) out.insert(out.end(), f.data.begin(), f.data.end());
    return out;
}

std::vector<GridField> unstack(const ContainerEntry& e, const GridField& proto) {
    std::vector<GridField> fs;
    size_t per = proto.size();
    size_t n = e.f64.size() / (per ? per : 1);
    for (size_t i = 0; i < n; ++i) {
        GridField f = proto;
        f.data.assign(e.f64.begin() + static_cast<long>(i * per),
                      e.f64.begin() + static_cast<long>((i + 1) * per));
        fs.push_back(std::move(f));
    }
    return fs;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.check();
    NowsContainer c;
    c.entries.push_back(
        ContainerEntry::real("inputs", stack_shape(ds.inputs), stack_data(ds.inputs)));
    if (ds.velocity_input) {
        c.entries.push_back(ContainerEntry::real("inputs_u", stack_shape(ds.inputs_u),
                                                 stack_data(ds.inputs_u)));
        c.entries.push_back(ContainerEntry::real("inputs_v", stack_shape(ds.inputs_v),
                                                 stack_data(ds.inputs_v)));
    }
    c.entries.push_back(ContainerEntry::real("outputs", stack_shape(ds.outputs),
                                             stack_data(ds.outputs)));
    c.entries.push_back(ContainerEntry::real(
        "stats", {static_cast<int64_t>(ds.in_mean.size()) * 2 + 2}, [&] {
            std::vector<double> s;
            for (size_t k = 0; k < ds.in_mean.size(); ++k) {
                s.push_back(ds.in_mean[k]);
                s.push_back(ds.in_std[k]);
            }
            s.push_back(ds.out_mean);
            s.push_back(ds.out_std);
            return s;
        }()));

    nlohmann::json meta;
    meta["kind"] = "dataset";
    meta["problem"] = problem_name(ds.problem);
    meta["resolution"] = ds.resolution;
    meta["seed"] = ds.seed;
    meta["grf_length_scale"] = ds.grf_length_scale;
    meta["velocity_input"] = ds.velocity_input;
    meta["darcy_mode"] =
        ds.darcy.mode == DarcyCoeffSpec::Mode::lognormal ? "lognormal" : "piecewise";
    meta["darcy_alpha"] = ds.darcy.alpha;
    meta["darcy_a_lo"] = ds.darcy.a_lo;
    meta["darcy_a_hi"] = ds.darcy.a_hi;
    meta["burgers_nu"] = ds.burgers.nu;
    meta["burgers_dt"] = ds.burgers.dt;
    meta["burgers_steps"] = ds.burgers.n_steps;
    meta["smoke_nu"] = ds.smoke.nu;
    meta["smoke_beta"] = ds.smoke.beta;
    meta["smoke_gravity"] = ds.smoke.gravity;
    meta["smoke_diffusivity"] = ds.smoke.diffusivity;
    meta["smoke_rho0"] = ds.smoke.rho0;
    meta["smoke_dt"] = ds.smoke.dt;
    meta["input_grid"] = {
        {"dims", ds.inputs.empty() ? 1 : ds.inputs[0].dims},
        {"shape", {ds.inputs.empty() ? 0 : ds.inputs[0].shape[0],
                   ds.inputs.empty() ? 1 : ds.inputs[0].shape[1]}},
        {"spacing", {ds.inputs.empty() ? 1.0 : ds.inputs[0].spacing[0],
                     ds.inputs.empty() ? 0.0 : ds.inputs[0].spacing[1]}},
        {"origin", {ds.inputs.empty() ? 0.0 : ds.inputs[0].origin[0],
                    ds.inputs.empty() ? 0.0 : ds.inputs[0].origin[1]}}};
    meta["output_grid"] = {
        {"dims", ds.outputs.empty() ? 1 : ds.outputs[0].dims},
        {"shape", {ds.outputs.empty() ? 0 : ds.outputs[0].shape[0],
                   ds.outputs.empty() ? 1 : ds.outputs[0].shape[1]}},
        {"spacing", {ds.outputs.empty() ? 1.0 : ds.outputs[0].spacing[0],
                     ds.outputs.empty() ? 0.0 : ds.outputs[0].spacing[1]}},
        {"origin", {ds.outputs.empty() ? 0.0 : ds.outputs[0].origin[0],
                    ds.outputs.empty() ? 0.0 : ds.outputs[0].origin[1]}}};
    c.set_metadata(meta);
    container_write(c, path);
}

namespace {

GridField grid_from_meta(const nlohmann::json& g) {
    GridField f;
    f.dims = g.at("dims").get<int>();
    f.shape = {g.at("shape")[0].get<int>(), g.at("shape")[1].get<int>()};
    f.spacing = {g.at("spacing")[0].get<double>(), g.at("spacing")[1].get<double>()};
    f.origin = {g.at("origin")[0].get<double>(), g.at("origin")[1].get<double>()};
    f.data.assign(static_cast<size_t>(f.shape[0]) * (f.dims == 2 ? f.shape[1] : 1), 0.0);
    return f;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    NowsContainer c = container_read(path);
    nlohmann::json meta = c.metadata();
    if (meta.value("kind", "") != "dataset")
        throw std::runtime_error("load_dataset: not a dataset container");
    Dataset ds;
    ds.problem = problem_from_name(meta.at("problem").get<std::string>());
    ds.resolution = meta.at("resolution").get<int>();
    ds.seed = meta.at("seed").get<uint64_t>();
    ds.grf_length_scale = meta.at("grf_length_scale").get<double>();
    ds.velocity_input = meta.value("velocity_input", false);
    ds.darcy.mode = meta.value("darcy_mode", "lognormal") == std::string("piecewise")
                        ? DarcyCoeffSpec::Mode::piecewise
                        : DarcyCoeffSpec::Mode::lognormal;
    ds.darcy.alpha = meta.value("darcy_alpha", 1.0);
    ds.darcy.a_lo = meta.value("darcy_a_lo", 1.0);
    ds.darcy.a_hi = meta.value("darcy_a_hi", 10.0);
    ds.burgers.n = ds.resolution;
    ds.burgers.nu = meta.value("burgers_nu", 0.05);
    ds.burgers.dt = meta.value("burgers_dt", 1e-3);
    ds.burgers.n_steps = meta.value("burgers_steps", 25);
    ds.smoke.nu = meta.value("smoke_nu", 1e-4);
    ds.smoke.beta = meta.value("smoke_beta", 1.0);
    ds.smoke.gravity = meta.value("smoke_gravity", 9.81);
    ds.smoke.diffusivity = meta.value("smoke_diffusivity", 1e-4);
    ds.smoke.rho0 = meta.value("smoke_rho0", 0.0);
    ds.smoke.dt = meta.value("smoke_dt", 0.01);

    GridField in_proto = grid_from_meta(meta.at("input_grid"));
    GridField out_proto = grid_from_meta(meta.at("output_grid"));
    ds.inputs = unstack(c.entry("inputs"), in_proto);
    ds.outputs = unstack(c.entry("outputs"), out_proto);
    if (ds.velocity_input) {
        ds.inputs_u = unstack(c.entry("inputs_u"), in_proto);
        ds.inputs_v = unstack(c.entry("inputs_v"), in_proto);
    }
    const auto& stats = c.entry("stats").f64;
    size_t ch = (stats.size() - 2) / 2;
    ds.in_mean.resize(ch);
    ds.in_std.resize(ch);
    for (size_t k = 0; k < ch; ++k) {
        ds.in_mean[k] = stats[2 * k];
        ds.in_std[k] = stats[2 * k + 1];
    }
    ds.out_mean = stats[stats.size() - 2];
    ds.out_std = stats[stats.size() - 1];
    ds.check();
    return ds;
}

}  // namespace nows
