#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nows/grid.hpp"
#include "nows/sparse.hpp"

namespace nows {

enum class ProblemKind { poisson, darcy, burgers, smoke };
const char* problem_name(ProblemKind k);
ProblemKind problem_from_name(const std::string& name);

/// One discretized linear system plus the field the operator sees.
struct ProblemInstance {
    ProblemKind kind = ProblemKind::poisson;
    CsrMatrix A;
    std::vector<double> b;
    GridField input_field;               // source p, coefficient a, prior state
    GridField solution_grid;             // layout of the unknown vector
    std::optional<std::vector<double>> reference;  // x*, when computed

    /// Relative residual of the reference against (A, b); used by the
    /// dataset invariant check.
    double reference_residual() const;
};

struct GrfSpec {
    int n = 16;             // grid size per axis
    double length_scale = 0.1;
    uint64_t seed = 0;
};

/// Mean-zero Gaussian random field with RBF covariance
/// exp(-|x-x'|^2 / (2 l^2)) sampled by circulant embedding on a doubled
/// periodic lattice, then restricted. Deterministic per seed. Negative
/// embedding eigenvalues are clipped at zero; a warning is printed if the
/// clipped mass exceeds a tolerance. The field covers the closed unit square
/// (spacing 1/(n-1)).
GridField sample_grf(const GrfSpec& spec);

/// Same process on an n0 x n1 lattice with spacing h (the process is
/// stationary, so only spacing matters; origin is attached by the caller).
GridField sample_grf_on(int n0, int n1, double h, double length_scale,
                        uint64_t seed);

/// Periodic 1D field on the unit circle (n points, spacing 1/n), covariance
/// evaluated at wrap-around distance.
GridField sample_grf_periodic_1d(int n, double length_scale, uint64_t seed);

struct DarcyCoeffSpec {
    enum class Mode { lognormal, piecewise };
    Mode mode = Mode::lognormal;
    double alpha = 1.0;     // contrast (lognormal)
    double a_lo = 1.0;      // piecewise value where g < 0
    double a_hi = 10.0;     // piecewise value where g >= 0
    double length_scale = 0.1;  // correlation length of the driving field
};

/// Map a Gaussian field g to a coefficient field: lognormal exp(alpha*g) or
/// the two-level piecewise-constant variant.
GridField darcy_coefficient(const GridField& g, const DarcyCoeffSpec& spec);

/// 5-point finite-difference Laplacian of -lap(u) = f on the unit square,
/// n x n interior nodes, h = 1/(n+1), homogeneous Dirichlet. The rhs for a
/// source f is the nodal values of f (supplied per sample).
ProblemInstance assemble_poisson_fd(int n);

/// Bilinear-quad FEM stiffness of -div(a grad u) = 1 on the unit square with
/// n x n elements (h = 1/n), homogeneous Dirichlet; unknowns are the
/// (n-1)^2 interior nodes. `a_elem` holds one positive coefficient value per
/// element (piecewise constant). 2x2 Gauss quadrature is exact for these
/// integrands, and the element matrices are its closed form.
ProblemInstance assemble_darcy_fem(const GridField& a_elem, int n);

/// 4-corner averages of a nodal field; the element-center coefficient fed to
/// assemble_darcy_fem when a is known at nodes.
GridField element_average(const GridField& nodal);

}  // namespace nows
