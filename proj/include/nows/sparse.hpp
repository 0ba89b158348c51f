#pragma once

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace nows {

/// Compressed sparse row matrix, f64 entries. Column indices are strictly
/// increasing within each row.
struct CsrMatrix {
    int nrows = 0;
    int ncols = 0;
    std::vector<int> row_offsets;  // length nrows+1, monotone
    std::vector<int> col_indices;
    std::vector<double> values;

    int nnz() const { return row_offsets.empty() ? 0 : row_offsets.back(); }
    void check() const;

    /// Entry lookup (binary search within the row); 0 if not stored.
    double at(int r, int c) const;

    std::vector<std::vector<double>> densify() const;
};

struct Triplet {
    int row;
    int col;
    double value;
};

/// Assemble a CSR matrix from (row, col, value) triplets. Duplicate entries
/// are summed (additive FEM assembly convention).
CsrMatrix csr_from_triplets(std::span<const Triplet> triplets, int nrows,
                            int ncols);

/// y = A * x with a fixed row-major accumulation order so traces are
/// byte-reproducible.
std::vector<double> spmv(const CsrMatrix& A, std::span<const double> x);
void spmv_into(const CsrMatrix& A, std::span<const double> x,
               std::span<double> y);

bool is_symmetric(const CsrMatrix& A, double tol = 0.0);

/// C = A * B (row-merge product; result rows sorted).
CsrMatrix csr_matmul(const CsrMatrix& A, const CsrMatrix& B);

CsrMatrix csr_transpose(const CsrMatrix& A);

struct EigEstimate {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int iterations = 0;
};

/// Extremal-eigenvalue estimate for a symmetric matrix via k Lanczos steps
/// with full reorthogonalization (deterministic seeded start vector).
/// Estimates lie inside the true spectral interval and improve with k.
EigEstimate lanczos_extremal(const CsrMatrix& A, int k, uint64_t seed);

}  // namespace nows
