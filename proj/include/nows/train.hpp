#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nows/dataset.hpp"
#include "nows/loss.hpp"
#include "nows/neuralop.hpp"

namespace nows {

struct TrainConfig {
    int batch_size = 20;
    double lr = 1e-3;
    int epochs = 300;
    enum class Loss { data, physics, mixed } loss = Loss::data;
    double lambda = 1.0;  // weight of the data term in the mixed loss
    double scheduler_factor = 0.5;
    int scheduler_patience = 50;
    uint64_t seed = 0;

    void check() const;
    static Loss loss_from_name(const std::string& name);
};

struct TrainHistory {
    std::vector<double> epoch_loss;
    std::vector<double> best_loss;  // running minimum; non-increasing
    std::vector<double> lr;
};

struct AdamState {
    std::vector<double> m, v;
    int64_t t = 0;
};

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard bias-corrected update over the flattened parameter views
/// (complex parameters update as re/im pairs). Gradients are read from the
/// refs' accumulators.
void adam_step(const std::vector<ParamRef>& refs, AdamState& state,
               const AdamHyper& hyper);

/// Seeded epoch loop: shuffled mini-batches, gradient averaging per batch,
/// plateau scheduler on the training loss, best-parameters-so-far retained
/// and restored into the model at the end. Deterministic per seed. Throws
/// (with the epoch index) on a non-finite loss.
TrainHistory train(FnoModel& model, const Dataset& ds, const TrainConfig& cfg);
TrainHistory train(MhnoModel& model, const Dataset& ds, const TrainConfig& cfg);

/// Per-sample training loss on a fresh tape; runs backward when accumulate
/// is set. Shared by train() and the finite-difference gradient checks.
double sample_loss(FnoModel& model, const Dataset& ds, size_t i,
                   TrainConfig::Loss kind, double lambda, bool accumulate,
                   ForwardWorkspace& ws);
double sample_loss(MhnoModel& model, const Dataset& ds, size_t i,
                   bool accumulate, ForwardWorkspace& ws);

}  // namespace nows
