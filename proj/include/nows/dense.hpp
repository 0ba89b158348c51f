#pragma once

#include <span>
#include <vector>

namespace nows {

/// Dense row-major square matrix helpers. These exist as oracles for the
/// iterative solvers and the Lanczos tridiagonal eigenproblem; not a general
/// dense linear algebra layer.

/// Solve A x = b by LU with partial pivoting. Throws std::runtime_error on
/// singular-to-working-precision input.
std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                std::span<const double> b);

/// Eigenvalues of a symmetric dense matrix (cyclic Jacobi), ascending.
std::vector<double> sym_eigenvalues(std::vector<std::vector<double>> A,
                                    double tol = 1e-14, int max_sweeps = 64);

}  // namespace nows
