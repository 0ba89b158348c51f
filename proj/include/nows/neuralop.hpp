#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nows/grid.hpp"
#include "nows/rng.hpp"
#include "nows/tape.hpp"

namespace nows {

/// Pointwise affine map (dense over channels, shared across grid points).
struct AffineParam {
    int in = 0, out = 0;
    std::vector<double> weight;  // (out, in) row-major
    std::vector<double> bias;    // (out)
    std::vector<double> gweight, gbias;

    void resize(int in_ch, int out_ch);
    void init(Rng& rng);  // Kaiming-uniform
};

/// Per-mode dense complex multiplier R(k), shape (K, W, W) with K the
/// retained mode count (M for 1D, (2M-1)*M for 2D).
struct SpectralParam {
    int dims = 1;
    int modes = 0;
    int width = 0;
    std::vector<cplx> weight;
    std::vector<cplx> gweight;

    int64_t mode_count() const {
        return dims == 1 ? modes : static_cast<int64_t>(2 * modes - 1) * modes;
    }
    void resize(int dims_, int modes_, int width_);
    void init(Rng& rng);  // uniform, scaled by 1/(W*W)
};

struct FnoLayer {
    SpectralParam spectral;
    AffineParam pointwise;  // width -> width, carries the layer bias
};

/// Lifting + L spectral blocks; shared between FNO and MHNO.
struct FnoTrunk {
    int dims = 2;
    int modes = 12;
    int width = 16;
    int layers = 4;
    int in_channels = 1;        // physical input channels
    bool coord_channels = true;
    ad::Activation act = ad::Activation::gelu;

    AffineParam lift;
    std::vector<FnoLayer> blocks;

    int lift_in() const { return in_channels + (coord_channels ? dims : 0); }
    void build();
    void init(Rng& rng);
};

struct FnoModel {
    FnoTrunk trunk;
    int q_width = 64;
    int out_channels = 1;
    AffineParam proj1, proj2;   // width -> q_width -> out_channels
    bool boundary_mask = false; // multiply output by x y (1-x)(1-y)

    std::vector<double> in_mean{0.0}, in_std{1.0};  // per input channel
    double out_mean = 0.0, out_std = 1.0;
    int train_resolution = 0;
    std::string problem = "poisson";

    void build();
    void init(uint64_t seed);
};

/// Shared trunk with per-step projection heads Q_n and temporal couplings
/// H_n (H_1 is the zero map): out_n = Q_n(trunk(u0)) + H_n(out_{n-1}).
struct MhnoModel {
    FnoTrunk trunk;             // dims = 1
    int n_t = 25;
    int q_width = 64;
    int h_width = 32;
    int out_channels = 1;

    std::vector<AffineParam> q1, q2;  // n_t heads
    std::vector<AffineParam> h1, h2;  // n_t - 1 couplings (steps 2..n_t)

    std::vector<double> in_mean{0.0}, in_std{1.0};
    double out_mean = 0.0, out_std = 1.0;  // identity by construction
    int train_resolution = 0;
    std::string problem = "burgers";

    void build();
    void init(uint64_t seed);
};

/// Flat view over every trainable array (complex exposed as re/im pairs);
/// the unit the optimizer, finite-difference probes, and checkpoints share.
struct ParamRef {
    std::string name;
    bool is_complex = false;
    std::vector<int64_t> shape;
    double* data = nullptr;
    double* grad = nullptr;
    int64_t doubles = 0;  // element count in doubles (2x for complex)
};

std::vector<ParamRef> param_refs(FnoModel& m);
std::vector<ParamRef> param_refs(MhnoModel& m);
void zero_grads(const std::vector<ParamRef>& refs);
int64_t param_count(const std::vector<ParamRef>& refs);

/// Mode sets must outlive any tape built against them; models cache one per
/// resolution.
struct ForwardWorkspace {
    ad::ModeSet modes;
    std::vector<double> staged_input;  // (lift_in, P), normalized + coords
    std::vector<double> mask;          // boundary multiplier values, if used
};

/// Stage a (possibly multi-channel) input field: normalize per channel with
/// the model stats and append coordinate channels.
void stage_input(const FnoTrunk& trunk, const std::vector<double>& in_mean,
                 const std::vector<double>& in_std,
                 const std::vector<const GridField*>& channels,
                 ForwardWorkspace& ws);

/// Trunk forward on a tape; returns the (width, P) feature node.
ad::NodeId trunk_forward(ad::Tape& tape, FnoTrunk& trunk,
                         const ForwardWorkspace& ws, int n0, int n1);

/// Full FNO forward on a tape; returns the physical-space output node
/// (out_channels, P), denormalized and boundary-masked when configured.
ad::NodeId fno_forward_tape(ad::Tape& tape, FnoModel& m,
                            const ForwardWorkspace& ws, int n0, int n1);

/// MHNO forward on a tape; returns the n_t output nodes (out_channels, n0).
std::vector<ad::NodeId> mhno_forward_tape(ad::Tape& tape, MhnoModel& m,
                                          const ForwardWorkspace& ws, int n0);

/// Values of the sign-normalized boundary multiplier x y (1-x)(1-y) at the
/// nodes of a 2D grid.
std::vector<double> boundary_multiplier_values(const GridField& g);

/// Build the mode set (and mask, when configured) for evaluating m on grids
/// shaped like `like`.
void prepare_workspace(FnoModel& m, const GridField& like, ForwardWorkspace& ws);

/// Convenience inference: evaluate the model on `input` at its own grid.
/// The grid must satisfy n >= 2*modes per axis (discretization invariance).
GridField fno_forward(FnoModel& m, const GridField& input);
GridField fno_forward(FnoModel& m, const std::vector<const GridField*>& channels);

/// MHNO rollout prediction: n_t fields from the initial condition.
std::vector<GridField> mhno_forward(MhnoModel& m, const GridField& u0);

/// One spectral convolution (the kernel of an FNO block) on a (W, P) field;
/// standalone so it can be checked against a naive DFT. Throws when M
/// exceeds the grid Nyquist.
std::vector<double> spectral_conv(const SpectralParam& R,
                                  std::span<const double> field, int n0, int n1);

void save_model(const FnoModel& m, const std::string& path);
void save_model(const MhnoModel& m, const std::string& path);
/// Peek at a checkpoint's architecture ("fno" or "mhno").
std::string model_kind(const std::string& path);
FnoModel load_fno(const std::string& path);
MhnoModel load_mhno(const std::string& path);

}  // namespace nows
