#pragma once

#include <array>

namespace nows {

/// Analytic element matrices for the bilinear quadrilateral on a rectangle
/// with half-widths (a, b), local node order counterclockwise from the
/// (-a,-b) corner: N1=(-, -), N2=(+, -), N3=(+, +), N4=(-, +).
///
/// Built from the 1D linear-element pieces (tensor product), so entries are
/// exact integrals: stiffness = kx (x) my + mx (x) ky, mass = mx (x) my.
using ElemMat = std::array<std::array<double, 4>, 4>;

/// Integrals of grad(N_p) . grad(N_q) over the element.
ElemMat element_stiffness(double a, double b);

/// Integrals of N_p * N_q over the element (consistent mass).
ElemMat element_mass(double a, double b);

}  // namespace nows
