#include "nows/neuralop.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nows/container.hpp"

namespace nows {

void AffineParam::resize(int in_ch, int out_ch) {
    in = in_ch;
    out = out_ch;
    weight.assign(static_cast<size_t>(in) * out, 0.0);
    bias.assign(static_cast<size_t>(out), 0.0);
    gweight.assign(weight.size(), 0.0);
    gbias.assign(bias.size(), 0.0);
}

void AffineParam::init(Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : weight) w = rng.uniform(-bound, bound);
    for (double& b : bias) b = rng.uniform(-bound, bound);
}

void SpectralParam::resize(int dims_, int modes_, int width_) {
    dims = dims_;
    modes = modes_;
    width = width_;
    weight.assign(static_cast<size_t>(mode_count()) * width * width,
                  cplx(0.0, 0.0));
    gweight.assign(weight.size(), cplx(0.0, 0.0));
}

void SpectralParam::init(Rng& rng) {
    double scale = 1.0 / (static_cast<double>(width) * width);
    for (cplx& w : weight)
        w = cplx(scale * rng.uniform(), scale * rng.uniform());
}

void FnoTrunk::build() {
    lift.resize(lift_in(), width);
    blocks.assign(layers, FnoLayer{});
    for (auto& blk : blocks) {
        blk.spectral.resize(dims, modes, width);
        blk.pointwise.resize(width, width);
    }
}

void FnoTrunk::init(Rng& rng) {
    lift.init(rng);
    for (auto& blk : blocks) {
        blk.spectral.init(rng);
        blk.pointwise.init(rng);
    }
}

void FnoModel::build() {
    trunk.build();
    proj1.resize(trunk.width, q_width);
    proj2.resize(q_width, out_channels);
    if (in_mean.size() != static_cast<size_t>(trunk.in_channels)) {
        in_mean.assign(trunk.in_channels, 0.0);
        in_std.assign(trunk.in_channels, 1.0);
    }
}

void FnoModel::init(uint64_t seed) {
    build();
    Rng rng(seed);
    trunk.init(rng);
    proj1.init(rng);
    proj2.init(rng);
}

void MhnoModel::build() {
    trunk.dims = 1;
    trunk.build();
    q1.assign(n_t, AffineParam{});
    q2.assign(n_t, AffineParam{});
    for (int n = 0; n < n_t; ++n) {
        q1[n].resize(trunk.width, q_width);
        q2[n].resize(q_width, out_channels);
    }
    h1.assign(n_t - 1, AffineParam{});
    h2.assign(n_t - 1, AffineParam{});
    for (int n = 0; n + 1 < n_t; ++n) {
        h1[n].resize(out_channels, h_width);
        h2[n].resize(h_width, out_channels);
    }
}

void MhnoModel::init(uint64_t seed) {
    build();
    Rng rng(seed);
    trunk.init(rng);
    for (int n = 0; n < n_t; ++n) {
        q1[n].init(rng);
        q2[n].init(rng);
    }
    for (int n = 0; n + 1 < n_t; ++n) {
        h1[n].init(rng);
        h2[n].init(rng);
    }
}

namespace {

void push_affine(std::vector<ParamRef>& refs, const std::string& name,
                 AffineParam& p) {
    refs.push_back({name + ".weight",
                    false,
                    {p.out, p.in},
                    p.weight.data(),
                    p.gweight.data(),
                    static_cast<int64_t>(p.weight.size())});
    refs.push_back({name + ".bias",
                    false,
                    {p.out},
                    p.bias.data(),
                    p.gbias.data(),
                    static_cast<int64_t>(p.bias.size())});
}

void push_spectral(std::vector<ParamRef>& refs, const std::string& name,
                   SpectralParam& p) {
    refs.push_back({name,
                    true,
                    {p.mode_count(), p.width, p.width},
                    reinterpret_cast<double*>(p.weight.data()),
                    reinterpret_cast<double*>(p.gweight.data()),
                    static_cast<int64_t>(p.weight.size()) * 2});
}

void push_trunk(std::vector<ParamRef>& refs, FnoTrunk& t) {
    push_affine(refs, "lift", t.lift);
    for (size_t i = 0; i < t.blocks.size(); ++i) {
        push_spectral(refs, "block" + std::to_string(i) + ".spectral",
                      t.blocks[i].spectral);
        push_affine(refs, "block" + std::to_string(i) + ".pointwise",
                    t.blocks[i].pointwise);
    }
}

}  // namespace

std::vector<ParamRef> param_refs(FnoModel& m) {
    std::vector<ParamRef> refs;
    push_trunk(refs, m.trunk);
    push_affine(refs, "proj1", m.proj1);
    push_affine(refs, "proj2", m.proj2);
    return refs;
}

std::vector<ParamRef> param_refs(MhnoModel& m) {
    std::vector<ParamRef> refs;
    push_trunk(refs, m.trunk);
    for (int n = 0; n < m.n_t; ++n) {
        push_affine(refs, "q" + std::to_string(n + 1) + ".1", m.q1[n]);
        push_affine(refs, "q" + std::to_string(n + 1) + ".2", m.q2[n]);
    }
    for (int n = 0; n + 1 < m.n_t; ++n) {
        push_affine(refs, "h" + std::to_string(n + 2) + ".1", m.h1[n]);
        push_affine(refs, "h" + std::to_string(n + 2) + ".2", m.h2[n]);
    }
    return refs;
}

void zero_grads(const std::vector<ParamRef>& refs) {
    for (const auto& r : refs)
        for (int64_t i = 0; i < r.doubles; ++i) r.grad[i] = 0.0;
}

int64_t param_count(const std::vector<ParamRef>& refs) {
    int64_t n = 0;
    for (const auto& r : refs) n += r.doubles;
    return n;
}

void stage_input(const FnoTrunk& trunk, const std::vector<double>& in_mean,
                 const std::vector<double>& in_std,
                 const std::vector<const GridField*>& channels,
                 ForwardWorkspace& ws) {
    if (channels.size() != static_cast<size_t>(trunk.in_channels))
        throw std::invalid_argument("stage_input: channel count mismatch");
    const GridField& f0 = *channels[0];
    const int64_t P = static_cast<int64_t>(f0.size());
    const int C = trunk.lift_in();
    ws.staged_input.assign(static_cast<size_t>(C) * P, 0.0);
    for (int c = 0; c < trunk.in_channels; ++c) {
        const GridField& f = *channels[c];
        if (f.size() != static_cast<size_t>(P))
            throw std::invalid_argument("stage_input: channel shape mismatch");
        double mu = in_mean[c], sd = in_std[c];
        for (int64_t i = 0; i < P; ++i)
            ws.staged_input[c * P + i] = (f.data[i] - mu) / sd;
    }
    if (trunk.coord_channels) {
        double* cx = ws.staged_input.data() +
                     static_cast<int64_t>(trunk.in_channels) * P;
        if (trunk.dims == 1) {
            for (int i = 0; i < f0.shape[0]; ++i) cx[i] = f0.coord(0, i);
        } else {
            double* cy = cx + P;
            for (int iy = 0; iy < f0.shape[0]; ++iy)
                for (int ix = 0; ix < f0.shape[1]; ++ix) {
                    cx[iy * f0.shape[1] + ix] = f0.coord(1, ix);
                    cy[iy * f0.shape[1] + ix] = f0.coord(0, iy);
                }
        }
    }
}

ad::NodeId trunk_forward(ad::Tape& tape, FnoTrunk& trunk,
                         const ForwardWorkspace& ws, int n0, int n1) {
    const int64_t P = trunk.dims == 1 ? n0 : static_cast<int64_t>(n0) * n1;
    ad::NodeId x = tape.input({trunk.lift_in(), P}, ws.staged_input);
    auto wrap = [&](AffineParam& a) {
        ad::NodeId w = tape.param({a.out, a.in}, a.weight, a.gweight);
        ad::NodeId b = tape.param({a.out}, a.bias, a.gbias);
        return std::pair<ad::NodeId, ad::NodeId>(w, b);
    };
    auto [lw, lb] = wrap(trunk.lift);
    x = tape.affine(x, lw, lb);
    const int fft_n1 = trunk.dims == 1 ? 0 : n1;
    for (auto& blk : trunk.blocks) {
        ad::NodeId z = tape.rfft_nd(x, n0, fft_n1);
        ad::NodeId zg = tape.spectral_gather(z, ws.modes);
        ad::NodeId R = tape.cparam(
            {blk.spectral.mode_count(), blk.spectral.width, blk.spectral.width},
            blk.spectral.weight, blk.spectral.gweight);
        ad::NodeId y = tape.mode_matmul(zg, R);
        ad::NodeId zs = tape.spectral_scatter(y, ws.modes);
        ad::NodeId spat = tape.irfft_nd(zs, n0, fft_n1);
        auto [pw, pb] = wrap(blk.pointwise);
        ad::NodeId lin = tape.affine(x, pw, pb);
        x = tape.activation(tape.add(spat, lin), trunk.act);
    }
    return x;
}

ad::NodeId fno_forward_tape(ad::Tape& tape, FnoModel& m,
                            const ForwardWorkspace& ws, int n0, int n1) {
    ad::NodeId x = trunk_forward(tape, m.trunk, ws, n0, n1);
    ad::NodeId w1 = tape.param({m.proj1.out, m.proj1.in}, m.proj1.weight,
                               m.proj1.gweight);
    ad::NodeId b1 = tape.param({m.proj1.out}, m.proj1.bias, m.proj1.gbias);
    x = tape.activation(tape.affine(x, w1, b1), m.trunk.act);
    ad::NodeId w2 = tape.param({m.proj2.out, m.proj2.in}, m.proj2.weight,
                               m.proj2.gweight);
    ad::NodeId b2 = tape.param({m.proj2.out}, m.proj2.bias, m.proj2.gbias);
    x = tape.affine(x, w2, b2);
    x = tape.scale_shift(x, m.out_std, m.out_mean);
    if (m.boundary_mask) x = tape.mul_mask(x, ws.mask);
    return x;
}

std::vector<double> boundary_multiplier_values(const GridField& g) {
    g.check();
    if (g.dims != 2)
        throw std::invalid_argument("boundary multiplier: 2D field required");
    std::vector<double> mask(g.size());
    for (int iy = 0; iy < g.shape[0]; ++iy)
        for (int ix = 0; ix < g.shape[1]; ++ix) {
            double x = g.coord(1, ix), y = g.coord(0, iy);
            mask[static_cast<size_t>(iy) * g.shape[1] + ix] =
                x * y * (1.0 - x) * (1.0 - y);
        }
    return mask;
}

void prepare_workspace(FnoModel& m, const GridField& like, ForwardWorkspace& ws) {
    ws.modes = ad::make_mode_set(m.trunk.modes, m.trunk.dims, like.shape[0],
                                 m.trunk.dims == 2 ? like.shape[1] : 0);
    if (m.boundary_mask) ws.mask = boundary_multiplier_values(like);
}

GridField fno_forward(FnoModel& m, const GridField& input) {
    return fno_forward(m, std::vector<const GridField*>{&input});
}

GridField fno_forward(FnoModel& m,
                      const std::vector<const GridField*>& channels) {
    const GridField& f0 = *channels[0];
    f0.check();
    if (f0.dims != m.trunk.dims)
        throw std::invalid_argument("fno_forward: dimensionality mismatch");
    ForwardWorkspace ws;
    prepare_workspace(m, f0, ws);
    stage_input(m.trunk, m.in_mean, m.in_std, channels, ws);
    ad::Tape tape;
    ad::NodeId out =
        fno_forward_tape(tape, m, ws, f0.shape[0], m.trunk.dims == 2 ? f0.shape[1] : 0);
    GridField result = f0;
    auto v = tape.value(out);
    result.data.assign(v.begin(), v.end());
    return result;
}

std::vector<GridField> mhno_forward(MhnoModel& m, const GridField& u0) {
    u0.check();
    if (u0.dims != 1)
        throw std::invalid_argument("mhno_forward: 1D input required");
    ForwardWorkspace ws;
    ws.modes = ad::make_mode_set(m.trunk.modes, 1, u0.shape[0], 0);
    stage_input(m.trunk, m.in_mean, m.in_std, {&u0}, ws);
    ad::Tape tape;
    std::vector<ad::NodeId> outs =
        mhno_forward_tape(tape, m, ws, u0.shape[0]);
    std::vector<GridField> fields;
    fields.reserve(outs.size());
    for (ad::NodeId id : outs) {
        GridField f = u0;
        auto v = tape.value(id);
        f.data.assign(v.begin(), v.end());
        fields.push_back(std::move(f));
    }
    return fields;
}

std::vector<ad::NodeId> mhno_forward_tape(ad::Tape& tape, MhnoModel& m,
                                          const ForwardWorkspace& ws, int n0) {
    ad::NodeId v = trunk_forward(tape, m.trunk, ws, n0, 0);
    auto head = [&](AffineParam& a1, AffineParam& a2, ad::NodeId in) {
        ad::NodeId w1 = tape.param({a1.out, a1.in}, a1.weight, a1.gweight);
        ad::NodeId b1 = tape.param({a1.out}, a1.bias, a1.gbias);
        ad::NodeId h = tape.activation(tape.affine(in, w1, b1), m.trunk.act);
        ad::NodeId w2 = tape.param({a2.out, a2.in}, a2.weight, a2.gweight);
        ad::NodeId b2 = tape.param({a2.out}, a2.bias, a2.gbias);
        return tape.affine(h, w2, b2);
    };
    std::vector<ad::NodeId> outs;
    ad::NodeId prev = -1;
    for (int n = 0; n < m.n_t; ++n) {
        ad::NodeId qn = head(m.q1[n], m.q2[n], v);
        ad::NodeId on = qn;
        if (n > 0) on = tape.add(qn, head(m.h1[n - 1], m.h2[n - 1], prev));
        outs.push_back(on);
        prev = on;
    }
    return outs;
}

std::vector<double> spectral_conv(const SpectralParam& R,
                                  std::span<const double> field, int n0,
                                  int n1) {
    const int W = R.width;
    const int64_t P = R.dims == 1 ? n0 : static_cast<int64_t>(n0) * n1;
    if (static_cast<int64_t>(field.size()) != W * P)
        throw std::invalid_argument("spectral_conv: field must be (W, P)");
    ad::ModeSet modes = ad::make_mode_set(R.modes, R.dims, n0, n1);
    const int64_t Pk = R.dims == 1 ? n0 / 2 + 1
                                   : static_cast<int64_t>(n0) * (n1 / 2 + 1);
    const int64_t K = modes.count();
    std::vector<cplx> spec(static_cast<size_t>(W) * Pk);
    for (int c = 0; c < W; ++c) {
        if (R.dims == 1)
            fft::rfft(field.data() + c * P, n0, spec.data() + c * Pk);
        else
            fft::rfft2(field.data() + c * P, n0, n1, spec.data() + c * Pk);
    }
    std::vector<cplx> out_spec(static_cast<size_t>(W) * Pk, cplx(0.0, 0.0));
    for (int64_t k = 0; k < K; ++k) {
        int bin = modes.bins[k];
        const cplx* Rk = R.weight.data() + k * W * W;
        for (int co = 0; co < W; ++co) {
            cplx acc(0.0, 0.0);
            for (int ci = 0; ci < W; ++ci)
                acc += Rk[co * W + ci] * spec[ci * Pk + bin];
            out_spec[co * Pk + bin] = acc;
        }
    }
    std::vector<double> out(static_cast<size_t>(W) * P);
    for (int c = 0; c < W; ++c) {
        if (R.dims == 1)
            fft::irfft(out_spec.data() + c * Pk, n0, out.data() + c * P);
        else
            fft::irfft2(out_spec.data() + c * Pk, n0, n1, out.data() + c * P);
    }
    return out;
}

namespace {

void meta_trunk(nlohmann::json& meta, const FnoTrunk& t) {
    meta["dims"] = t.dims;
    meta["modes"] = t.modes;
    meta["width"] = t.width;
    meta["layers"] = t.layers;
    meta["in_channels"] = t.in_channels;
    meta["coord_channels"] = t.coord_channels;
    meta["activation"] =
        t.act == ad::Activation::gelu ? "gelu" : "identity";
}

void trunk_from_meta(const nlohmann::json& meta, FnoTrunk& t) {
    t.dims = meta.at("dims").get<int>();
    t.modes = meta.at("modes").get<int>();
    t.width = meta.at("width").get<int>();
    t.layers = meta.at("layers").get<int>();
    t.in_channels = meta.at("in_channels").get<int>();
    t.coord_channels = meta.at("coord_channels").get<bool>();
    std::string act = meta.at("activation").get<std::string>();
    if (act == "gelu")
        t.act = ad::Activation::gelu;
    else if (act == "identity")
        t.act = ad::Activation::identity;
    else
        throw std::runtime_error("load_model: unknown activation '" + act + "'");
}

template <typename Model>
void entries_from_refs(NowsContainer& c, Model& m) {
    for (const ParamRef& r : param_refs(m)) {
        if (r.is_complex) {
            std::vector<cplx> data(static_cast<size_t>(r.doubles / 2));
            std::memcpy(data.data(), r.data, sizeof(double) * r.doubles);
            c.entries.push_back(
                ContainerEntry::complex(r.name, r.shape, std::move(data)));
        } else {
            c.entries.push_back(ContainerEntry::real(
                r.name, r.shape,
                std::vector<double>(r.data, r.data + r.doubles)));
        }
    }
}

template <typename Model>
void refs_from_entries(const NowsContainer& c, Model& m) {
    for (const ParamRef& r : param_refs(m)) {
        const ContainerEntry& e = c.entry(r.name);
        if (e.is_complex != r.is_complex || e.shape != r.shape)
            throw std::runtime_error("load_model: shape mismatch for '" + r.name +
                                     "'");
        if (r.is_complex)
            std::memcpy(r.data, e.c128.data(), sizeof(double) * r.doubles);
        else
            std::memcpy(r.data, e.f64.data(), sizeof(double) * r.doubles);
    }
}

}  // namespace

void save_model(const FnoModel& m, const std::string& path) {
    nlohmann::json meta;
    meta["kind"] = "model";
    meta["arch"] = "fno";
    meta_trunk(meta, m.trunk);
    meta["q_width"] = m.q_width;
    meta["out_channels"] = m.out_channels;
    meta["boundary_mask"] = m.boundary_mask;
    meta["in_mean"] = m.in_mean;
    meta["in_std"] = m.in_std;
    meta["out_mean"] = m.out_mean;
    meta["out_std"] = m.out_std;
    meta["train_resolution"] = m.train_resolution;
    meta["problem"] = m.problem;
    NowsContainer c;
    c.set_metadata(meta);
    entries_from_refs(c, const_cast<FnoModel&>(m));
    container_write(c, path);
}

void save_model(const MhnoModel& m, const std::string& path) {
    nlohmann::json meta;
    meta["kind"] = "model";
    meta["arch"] = "mhno";
    meta_trunk(meta, m.trunk);
    meta["n_t"] = m.n_t;
    meta["q_width"] = m.q_width;
    meta["h_width"] = m.h_width;
    meta["out_channels"] = m.out_channels;
    meta["in_mean"] = m.in_mean;
    meta["in_std"] = m.in_std;
    meta["out_mean"] = m.out_mean;
    meta["out_std"] = m.out_std;
    meta["train_resolution"] = m.train_resolution;
    meta["problem"] = m.problem;
    NowsContainer c;
    c.set_metadata(meta);
    entries_from_refs(c, const_cast<MhnoModel&>(m));
    container_write(c, path);
}

std::string model_kind(const std::string& path) {
    NowsContainer c = container_read(path);
    nlohmann::json meta = c.metadata();
    if (meta.value("kind", "") != "model")
        throw std::runtime_error("model_kind: not a model container");
    return meta.at("arch").get<std::string>();
}

FnoModel load_fno(const std::string& path) {
    NowsContainer c = container_read(path);
    nlohmann::json meta = c.metadata();
    if (meta.value("kind", "") != "model" || meta.value("arch", "") != "fno")
        throw std::runtime_error("load_fno: not an fno checkpoint");
    FnoModel m;
    trunk_from_meta(meta, m.trunk);
    m.q_width = meta.at("q_width").get<int>();
    m.out_channels = meta.at("out_channels").get<int>();
    m.boundary_mask = meta.at("boundary_mask").get<bool>();
    m.in_mean = meta.at("in_mean").get<std::vector<double>>();
    m.in_std = meta.at("in_std").get<std::vector<double>>();
    m.out_mean = meta.at("out_mean").get<double>();
    m.out_std = meta.at("out_std").get<double>();
    m.train_resolution = meta.at("train_resolution").get<int>();
    m.problem = meta.at("problem").get<std::string>();
    m.build();
    refs_from_entries(c, m);
    return m;
}

MhnoModel load_mhno(const std::string& path) {
    NowsContainer c = container_read(path);
    nlohmann::json meta = c.metadata();
    if (meta.value("kind", "") != "model" || meta.value("arch", "") != "mhno")
        throw std::runtime_error("load_mhno: not an mhno checkpoint");
    MhnoModel m;
    trunk_from_meta(meta, m.trunk);
    m.n_t = meta.at("n_t").get<int>();
    m.q_width = meta.at("q_width").get<int>();
    m.h_width = meta.at("h_width").get<int>();
    m.out_channels = meta.at("out_channels").get<int>();
    m.in_mean = meta.at("in_mean").get<std::vector<double>>();
    m.in_std = meta.at("in_std").get<std::vector<double>>();
    m.out_mean = meta.at("out_mean").get<double>();
    m.out_std = meta.at("out_std").get<double>();
    m.train_resolution = meta.at("train_resolution").get<int>();
    m.problem = meta.at("problem").get<std::string>();
    m.build();
    refs_from_entries(c, m);
    return m;
}

}  // namespace nows
