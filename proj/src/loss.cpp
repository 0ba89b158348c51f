#include "nows/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "nows/neuralop.hpp"

namespace nows {

double loss_data_l2(const GridField& pred, const GridField& truth) {
    if (pred.data.size() != truth.data.size())
        throw std::invalid_argument("loss_data_l2: shape mismatch");
    double dn = 0.0, tn = 0.0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        double d = pred.data[i] - truth.data[i];
        dn += d * d;
        tn += truth.data[i] * truth.data[i];
    }
    if (tn == 0.0) throw std::invalid_argument("loss_data_l2: zero-norm truth");
    return std::sqrt(dn) / std::sqrt(tn);
}

double loss_data_l2(const std::vector<GridField>& pred,
                    const std::vector<GridField>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("loss_data_l2: batch mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) acc += loss_data_l2(pred[i], truth[i]);
    return acc / static_cast<double>(pred.size());
}

ad::VinoQuad make_vino_quad(VinoKind kind, const GridField& pred_grid,
                            const GridField& coeff_or_f,
                            const VinoLossCfg& cfg) {
    pred_grid.check();
    if (pred_grid.dims != 2)
        throw std::invalid_argument("loss_vino: 2D nodal field required");
    ad::VinoQuad q;
    q.n0 = pred_grid.shape[0];
    q.n1 = pred_grid.shape[1];
    q.half_x = cfg.half_x > 0.0 ? cfg.half_x : 0.5 * pred_grid.spacing[1];
    q.half_y = cfg.half_y > 0.0 ? cfg.half_y : 0.5 * pred_grid.spacing[0];
    const size_t elems = static_cast<size_t>(q.n0 - 1) * (q.n1 - 1);
    if (kind == VinoKind::poisson) {
        if (coeff_or_f.data.size() != pred_grid.size())
            throw std::invalid_argument("loss_vino: forcing/pred shape mismatch");
        q.a_elem.assign(elems, 1.0);
        q.f_nodal = coeff_or_f.data;
    } else {
        if (coeff_or_f.data.size() != elems)
            throw std::invalid_argument("loss_vino: per-element coefficient expected");
        q.a_elem = coeff_or_f.data;
        q.f_nodal.assign(pred_grid.size(), 1.0);
    }
    return q;
}

double loss_vino(VinoKind kind, const GridField& pred,
                 const GridField& coeff_or_f, const VinoLossCfg& cfg) {
    ad::VinoQuad q = make_vino_quad(kind, pred, coeff_or_f, cfg);
    return ad::vino_energy_value(q, pred.data) - cfg.psi_ref;
}

GridField apply_boundary_multiplier(const GridField& field) {
    std::vector<double> mask = boundary_multiplier_values(field);
    GridField out = field;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask[i];
    return out;
}

}  // namespace nows
