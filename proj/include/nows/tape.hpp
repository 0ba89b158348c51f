#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nows/fft.hpp"

namespace nows::ad {

enum class Activation { identity, gelu };

/// Retained FNO modes: slot -> flat bin index in the (C, Pk) half-spectrum.
/// Slots are enumerated by signed frequency (|k| < modes per axis), so the
/// same weight slot refers to the same physical mode at every resolution.
struct ModeSet {
    int modes = 0;       // M
    int dims = 1;
    int n0 = 0, n1 = 0;  // spatial shape (n1 unused for 1D)
    std::vector<int> bins;

    int count() const { return static_cast<int>(bins.size()); }
};

ModeSet make_mode_set(int modes, int dims, int n0, int n1);

/// Quadratic element energy sum_e [ a_e/2 * u_e^T K u_e - f_e^T M u_e ] over
/// the bilinear elements of an n0 x n1 nodal grid (K, M analytic).
struct VinoQuad {
    int n0 = 0, n1 = 0;
    double half_x = 0.0, half_y = 0.0;  // element half-widths
    std::vector<double> a_elem;          // (n0-1)*(n1-1), all 1 for Poisson
    std::vector<double> f_nodal;         // n0*n1
};

/// Forward value of the element-energy sum (no tape).
double vino_energy_value(const VinoQuad& quad, std::span<const double> u);

using NodeId = int;

/// Reverse-mode tape over real/complex arrays. Nodes are created in forward
/// order; backward() walks them in reverse. Parameter leaves view external
/// value storage and accumulate (+=) into external gradient storage, so one
/// model can be replayed across samples without copying parameters.
class Tape {
  public:
    NodeId input(std::vector<int64_t> shape, std::span<const double> data);
    NodeId param(std::vector<int64_t> shape, std::span<const double> value,
                 std::span<double> grad);
    NodeId cparam(std::vector<int64_t> shape, std::span<const cplx> value,
                  std::span<cplx> grad);

    /// x:(Ci,P), W:(Co,Ci), b:(Co) -> (Co,P); y = W x + b.
    NodeId affine(NodeId x, NodeId W, NodeId b);
    NodeId add(NodeId a, NodeId b);
    /// wa*a + wb*b, same shapes.
    NodeId add_scaled(NodeId a, NodeId b, double wa, double wb);
    /// a*x + c, elementwise.
    NodeId scale_shift(NodeId x, double a, double c);
    /// Rows of x multiplied by a fixed mask of length P.
    NodeId mul_mask(NodeId x, std::span<const double> mask);
    NodeId activation(NodeId x, Activation act);

    /// Per-row (= per-channel) transforms. x:(C, n0*n1) -> (C, n0*(n1/2+1))
    /// complex for 2D; 1D uses n1 = 0 and length n0.
    NodeId rfft_nd(NodeId x, int n0, int n1);
    NodeId irfft_nd(NodeId z, int n0, int n1);

    /// (C,Pk) -> (K,C): pick retained bins (truncation).
    NodeId spectral_gather(NodeId z, const ModeSet& modes);
    /// zg:(K,Ci) x R:(K,Co,Ci) -> (K,Co), per-mode dense complex product.
    NodeId mode_matmul(NodeId zg, NodeId R);
    /// (K,Co) -> (Co,Pk): place retained bins, zeros elsewhere (padding).
    NodeId spectral_scatter(NodeId y, const ModeSet& modes);

    /// (C, n0*n1) -> (C, (n0+2)*(n1+2)): surround each row's grid with a
    /// zero ring (homogeneous Dirichlet embedding).
    NodeId embed_interior(NodeId x, int n0, int n1);

    /// ||pred - truth||_2 / ||truth||_2 over all elements (scalar node).
    NodeId rel_l2(NodeId pred, std::span<const double> truth);
    /// Element-energy functional of a (1, n0*n1) nodal field (scalar node).
    NodeId vino_energy(NodeId pred, const VinoQuad& quad);

    void backward(NodeId loss);

    std::span<const double> value(NodeId id) const;
    std::span<const cplx> cvalue(NodeId id) const;
    std::span<const double> grad(NodeId id) const;
    double scalar(NodeId id) const;
    const std::vector<int64_t>& shape(NodeId id) const;

  private:
    struct Node;
    std::vector<Node> nodes_;

    Node& make(std::vector<int64_t> shape, bool is_complex);
    int64_t numel(NodeId id) const;
};

}  // namespace nows::ad
