#include "nows/train.hpp"

#include <cmath>
#include <stdexcept>

namespace nows {

void TrainConfig::check() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size >= 1");
    if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr > 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs >= 1");
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda >= 0");
}

TrainConfig::Loss TrainConfig::loss_from_name(const std::string& name) {
    if (name == "data") return Loss::data;
    if (name == "physics") return Loss::physics;
    if (name == "mixed") return Loss::mixed;
    throw std::invalid_argument("unknown loss kind: " + name);
}

void adam_step(const std::vector<ParamRef>& refs, AdamState& state,
               const AdamHyper& hyper) {
    int64_t total = param_count(refs);
    if (state.m.empty()) {
        state.m.assign(static_cast<size_t>(total), 0.0);
        state.v.assign(static_cast<size_t>(total), 0.0);
    }
    if (static_cast<int64_t>(state.m.size()) != total)
        throw std::invalid_argument("adam_step: state size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
    int64_t off = 0;
    for (const ParamRef& r : refs) {
        for (int64_t i = 0; i < r.doubles; ++i) {
            double g = r.grad[i];
            double& m = state.m[static_cast<size_t>(off + i)];
            double& v = state.v[static_cast<size_t>(off + i)];
            m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
            v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g;
            double mhat = m / bc1;
            double vhat = v / bc2;
            r.data[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
        }
        off += r.doubles;
    }
}

namespace {

std::vector<const GridField*> sample_channels(const Dataset& ds, size_t i) {
    std::vector<const GridField*> ch{&ds.inputs[i]};
    if (ds.velocity_input) {
        ch.push_back(&ds.inputs_u[i]);
        ch.push_back(&ds.inputs_v[i]);
    }
    return ch;
}

std::vector<double> snapshot(const std::vector<ParamRef>& refs) {
    std::vector<double> buf;
    buf.reserve(static_cast<size_t>(param_count(refs)));
    for (const auto& r : refs) buf.insert(buf.end(), r.data, r.data + r.doubles);
    return buf;
}

void restore(const std::vector<ParamRef>& refs, const std::vector<double>& buf) {
    size_t off = 0;
    for (const auto& r : refs) {
        std::copy(buf.begin() + static_cast<long>(off),
                  buf.begin() + static_cast<long>(off + r.doubles), r.data);
        off += static_cast<size_t>(r.doubles);
    }
}

template <typename LossFn>
TrainHistory run_epochs(const std::vector<ParamRef>& refs, size_t n_samples,
                        const TrainConfig& cfg, LossFn&& batch_loss) {
    cfg.check();
    Rng rng(cfg.seed);
    AdamState adam;
    AdamHyper hyper;
    hyper.lr = cfg.lr;
    TrainHistory hist;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = snapshot(refs);
    int since_improve = 0;
    double lr = cfg.lr;

    std::vector<size_t> order(n_samples);
    for (size_t i = 0; i < n_samples; ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = n_samples; i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        double loss_sum = 0.0;
        for (size_t start = 0; start < n_samples;
             start += static_cast<size_t>(cfg.batch_size)) {
            size_t end = std::min(n_samples, start + cfg.batch_size);
            zero_grads(refs);
            double bl = 0.0;
            for (size_t k = start; k < end; ++k) bl += batch_loss(order[k]);
            double inv = 1.0 / static_cast<double>(end - start);
            for (const auto& r : refs)
                for (int64_t i = 0; i < r.doubles; ++i) r.grad[i] *= inv;
            hyper.lr = lr;
            adam_step(refs, adam, hyper);
            loss_sum += bl;
        }
        double epoch_loss = loss_sum / static_cast<double>(n_samples);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train: non-finite loss at epoch " +
                                     std::to_string(epoch));
        hist.epoch_loss.push_back(epoch_loss);
        hist.lr.push_back(lr);
        if (epoch_loss < best) {
            best = epoch_loss;
            best_params = snapshot(refs);
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve > cfg.scheduler_patience) {
                lr *= cfg.scheduler_factor;
                since_improve = 0;
            }
        }
        hist.best_loss.push_back(best);
    }
    restore(refs, best_params);
    return hist;
}

}  // namespace

double sample_loss(FnoModel& model, const Dataset& ds, size_t i,
                   TrainConfig::Loss kind, double lambda, bool accumulate,
                   ForwardWorkspace& ws) {
    const GridField& in0 = ds.inputs[i];
    const GridField& truth = ds.outputs[i];
    stage_input(model.trunk, model.in_mean, model.in_std, sample_channels(ds, i),
                ws);
    const int n0 = in0.shape[0];
    const int n1 = model.trunk.dims == 2 ? in0.shape[1] : 0;

    ad::Tape tape;
    ad::NodeId pred = fno_forward_tape(tape, model, ws, n0, n1);

    // Physics terms live on a nodal grid with the zero Dirichlet ring.
    ad::VinoQuad quad;
    ad::NodeId loss;
    switch (kind) {
        case TrainConfig::Loss::data:
            loss = tape.rel_l2(pred, truth.data);
            break;
        case TrainConfig::Loss::physics:
        case TrainConfig::Loss::mixed: {
            if (ds.problem == ProblemKind::poisson) {
                ad::NodeId full = tape.embed_interior(pred, n0, in0.shape[1]);
                quad.n0 = n0 + 2;
                quad.n1 = in0.shape[1] + 2;
                quad.half_x = 0.5 * in0.spacing[1];
                quad.half_y = 0.5 * in0.spacing[0];
                quad.a_elem.assign(static_cast<size_t>(quad.n0 - 1) * (quad.n1 - 1),
                                   1.0);
                // Forcing, zero-extended onto the ring.
                quad.f_nodal.assign(static_cast<size_t>(quad.n0) * quad.n1, 0.0);
                for (int iy = 0; iy < n0; ++iy)
                    for (int ix = 0; ix < in0.shape[1]; ++ix)
                        quad.f_nodal[(iy + 1) * quad.n1 + (ix + 1)] =
                            in0.at(iy, ix);
                ad::NodeId phys = tape.vino_energy(full, quad);
                loss = kind == TrainConfig::Loss::physics
                           ? phys
                           : tape.add_scaled(phys, tape.rel_l2(pred, truth.data),
                                             1.0, lambda);
            } else if (ds.problem == ProblemKind::darcy) {
                quad.n0 = n0;
                quad.n1 = in0.shape[1];
                quad.half_x = 0.5 * in0.spacing[1];
                quad.half_y = 0.5 * in0.spacing[0];
                quad.a_elem = element_average(in0).data;
                quad.f_nodal.assign(in0.size(), 1.0);
                ad::NodeId phys = tape.vino_energy(pred, quad);
                loss = kind == TrainConfig::Loss::physics
                           ? phys
                           : tape.add_scaled(phys, tape.rel_l2(pred, truth.data),
                                             1.0, lambda);
            } else {
                throw std::invalid_argument(
                    "train: physics/mixed losses are defined for poisson and darcy");
            }
            break;
        }
        default:
            throw std::invalid_argument("train: unknown loss kind");
    }
    if (accumulate) tape.backward(loss);
    return tape.scalar(loss);
}

double sample_loss(MhnoModel& model, const Dataset& ds, size_t i,
                   bool accumulate, ForwardWorkspace& ws) {
    const GridField& u0 = ds.inputs[i];
    const GridField& traj = ds.outputs[i];
    if (traj.dims != 2 || traj.shape[0] != model.n_t)
        throw std::invalid_argument("train: trajectory shape mismatch");
    stage_input(model.trunk, model.in_mean, model.in_std, {&u0}, ws);
    ad::Tape tape;
    std::vector<ad::NodeId> outs = mhno_forward_tape(tape, model, ws, u0.shape[0]);
    const int nx = traj.shape[1];
    ad::NodeId loss = -1;
    for (int n = 0; n < model.n_t; ++n) {
        std::span<const double> row(traj.data.data() +
                                        static_cast<size_t>(n) * nx,
                                    static_cast<size_t>(nx));
        ad::NodeId l = tape.rel_l2(outs[n], row);
        loss = n == 0 ? l : tape.add(loss, l);
    }
    loss = tape.scale_shift(loss, 1.0 / model.n_t, 0.0);
    if (accumulate) tape.backward(loss);
    return tape.scalar(loss);
}

TrainHistory train(FnoModel& model, const Dataset& ds, const TrainConfig& cfg) {
    ds.check();
    if (ds.inputs.empty()) throw std::invalid_argument("train: empty dataset");
    model.in_mean = ds.in_mean;
    model.in_std = ds.in_std;
    model.out_mean = ds.out_mean;
    model.out_std = ds.out_std;
    model.train_resolution = ds.resolution;
    model.problem = problem_name(ds.problem);

    ForwardWorkspace ws;
    prepare_workspace(model, ds.inputs[0], ws);
    auto refs = param_refs(model);
    return run_epochs(refs, ds.size(), cfg, [&](size_t i) {
        return sample_loss(model, ds, i, cfg.loss, cfg.lambda, true, ws);
    });
}

TrainHistory train(MhnoModel& model, const Dataset& ds, const TrainConfig& cfg) {
    ds.check();
    if (ds.problem != ProblemKind::burgers)
        throw std::invalid_argument("train(MhnoModel): burgers dataset required");
    if (cfg.loss != TrainConfig::Loss::data)
        throw std::invalid_argument("train(MhnoModel): data loss only");
    model.in_mean = ds.in_mean;
    model.in_std = ds.in_std;
    model.out_mean = 0.0;
    model.out_std = 1.0;
    model.train_resolution = ds.resolution;
    model.problem = problem_name(ds.problem);

    ForwardWorkspace ws;
    ws.modes = ad::make_mode_set(model.trunk.modes, 1, ds.inputs[0].shape[0], 0);
    auto refs = param_refs(model);
    return run_epochs(refs, ds.size(), cfg, [&](size_t i) {
        return sample_loss(model, ds, i, true, ws);
    });
}

}  // namespace nows
