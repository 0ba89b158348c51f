#pragma once

#include <vector>

#include "nows/grid.hpp"
#include "nows/tape.hpp"

namespace nows {

enum class VinoKind { poisson, darcy };

struct VinoLossCfg {
    double half_x = 0.0, half_y = 0.0;  // element half-widths (grid spacing / 2)
    bool boundary_multiplier = true;    // caller applies m(x,y) to pred
    double psi_ref = 0.0;               // reference energy; 0 for equilibrium
};

/// Relative L2: ||pred - truth|| / ||truth||, batch-averaged in the vector
/// overload. Throws on zero-norm truth.
double loss_data_l2(const GridField& pred, const GridField& truth);
double loss_data_l2(const std::vector<GridField>& pred,
                    const std::vector<GridField>& truth);

/// Analytic element-energy loss over bilinear elements:
///   sum_e int a/2 |grad u|^2 - f u  (minus psi_ref).
/// poisson: coeff_or_f is the nodal forcing (a = 1);
/// darcy:   coeff_or_f is the per-element coefficient (f = 1).
/// The boundary term of the general functional is omitted: the in-scope
/// problems enforce homogeneous essential conditions via the multiplier.
double loss_vino(VinoKind kind, const GridField& pred,
                 const GridField& coeff_or_f, const VinoLossCfg& cfg);

/// Quadrature data behind loss_vino, shared with the tape node.
ad::VinoQuad make_vino_quad(VinoKind kind, const GridField& pred_grid,
                            const GridField& coeff_or_f,
                            const VinoLossCfg& cfg);

/// Pointwise multiply by x y (1-x)(1-y) (zero on the unit-square boundary).
GridField apply_boundary_multiplier(const GridField& field);

}  // namespace nows
