#include "nows/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nows/dense.hpp"
#include "nows/rng.hpp"

namespace nows {

void CsrMatrix::check() const {
    if (nrows < 0 || ncols < 0)
        throw std::invalid_argument("CsrMatrix: negative dimension");
    if (row_offsets.size() != static_cast<size_t>(nrows) + 1)
        throw std::invalid_argument("CsrMatrix: row_offsets length != nrows+1");
    if (row_offsets[0] != 0)
        throw std::invalid_argument("CsrMatrix: row_offsets[0] != 0");
    for (int i = 0; i < nrows; ++i) {
        if (row_offsets[i + 1] < row_offsets[i])
            throw std::invalid_argument("CsrMatrix: row_offsets not monotone");
        for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
            if (col_indices[k] < 0 || col_indices[k] >= ncols)
                throw std::invalid_argument("CsrMatrix: column index out of range");
            if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
                throw std::invalid_argument(
                    "CsrMatrix: columns not strictly increasing in row");
        }
    }
    if (values.size() != static_cast<size_t>(row_offsets[nrows]) ||
        col_indices.size() != values.size())
        throw std::invalid_argument("CsrMatrix: values length != row_offsets[nrows]");
}

double CsrMatrix::at(int r, int c) const {
    const int* first = col_indices.data() + row_offsets[r];
    const int* last = col_indices.data() + row_offsets[r + 1];
    const int* it = std::lower_bound(first, last, c);
    if (it != last && *it == c) return values[it - col_indices.data()];
    return 0.0;
}

std::vector<std::vector<double>> CsrMatrix::densify() const {
    std::vector<std::vector<double>> D(nrows, std::vector<double>(ncols, 0.0));
    for (int i = 0; i < nrows; ++i)
        for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
            D[i][col_indices[k]] += values[k];
    return D;
}

CsrMatrix csr_from_triplets(std::span<const Triplet> triplets, int nrows,
                            int ncols) {
    for (const Triplet& t : triplets)
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw std::out_of_range("csr_from_triplets: index out of range");

    std::vector<size_t> order(triplets.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (triplets[a].row != triplets[b].row)
            return triplets[a].row < triplets[b].row;
        return triplets[a].col < triplets[b].col;
    });

    CsrMatrix A;
    A.nrows = nrows;
    A.ncols = ncols;
    A.row_offsets.assign(nrows + 1, 0);
    for (size_t idx = 0; idx < order.size(); ++idx) {
        const Triplet& t = triplets[order[idx]];
        if (idx > 0) {
            const Triplet& p = triplets[order[idx - 1]];
            if (p.row == t.row && p.col == t.col) {
                A.values.back() += t.value;
                continue;
            }
        }
        A.col_indices.push_back(t.col);
        A.values.push_back(t.value);
        A.row_offsets[t.row + 1] += 1;
    }
    for (int i = 0; i < nrows; ++i) A.row_offsets[i + 1] += A.row_offsets[i];
    A.check();
    return A;
}

std::vector<double> spmv(const CsrMatrix& A, std::span<const double> x) {
    std::vector<double> y(A.nrows, 0.0);
    spmv_into(A, x, y);
    return y;
}

void spmv_into(const CsrMatrix& A, std::span<const double> x,
               std::span<double> y) {
    if (x.size() != static_cast<size_t>(A.ncols) ||
        y.size() != static_cast<size_t>(A.nrows))
        throw std::invalid_argument("spmv: dimension mismatch");
    const int* ro = A.row_offsets.data();
    const int* ci = A.col_indices.data();
    const double* v = A.values.data();
    for (int i = 0; i < A.nrows; ++i) {
        double acc = 0.0;
        for (int k = ro[i]; k < ro[i + 1]; ++k) acc += v[k] * x[ci[k]];
        y[i] = acc;
    }
}

CsrMatrix csr_transpose(const CsrMatrix& A) {
    CsrMatrix T;
    T.nrows = A.ncols;
    T.ncols = A.nrows;
    T.row_offsets.assign(T.nrows + 1, 0);
    for (int k = 0; k < A.nnz(); ++k) T.row_offsets[A.col_indices[k] + 1]++;
    for (int i = 0; i < T.nrows; ++i) T.row_offsets[i + 1] += T.row_offsets[i];
    T.col_indices.resize(A.nnz());
    T.values.resize(A.nnz());
    std::vector<int> cursor(T.row_offsets.begin(), T.row_offsets.end() - 1);
    for (int i = 0; i < A.nrows; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            int pos = cursor[A.col_indices[k]]++;
            T.col_indices[pos] = i;
            T.values[pos] = A.values[k];
        }
    return T;
}

CsrMatrix csr_matmul(const CsrMatrix& A, const CsrMatrix& B) {
    if (A.ncols != B.nrows)
        throw std::invalid_argument("csr_matmul: inner dimension mismatch");
    CsrMatrix C;
    C.nrows = A.nrows;
    C.ncols = B.ncols;
    C.row_offsets.assign(A.nrows + 1, 0);
    std::vector<double> acc(B.ncols, 0.0);
    std::vector<int> mark(B.ncols, -1);
    std::vector<int> touched;
    for (int i = 0; i < A.nrows; ++i) {
        touched.clear();
        for (int ka = A.row_offsets[i]; ka < A.row_offsets[i + 1]; ++ka) {
            int k = A.col_indices[ka];
            double av = A.values[ka];
            for (int kb = B.row_offsets[k]; kb < B.row_offsets[k + 1]; ++kb) {
                int j = B.col_indices[kb];
                if (mark[j] != i) {
                    mark[j] = i;
                    acc[j] = 0.0;
                    touched.push_back(j);
                }
                acc[j] += av * B.values[kb];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int j : touched) {
            C.col_indices.push_back(j);
            C.values.push_back(acc[j]);
        }
        C.row_offsets[i + 1] = static_cast<int>(C.col_indices.size());
    }
    return C;
}

bool is_symmetric(const CsrMatrix& A, double tol) {
    if (A.nrows != A.ncols) return false;
    for (int i = 0; i < A.nrows; ++i)
        for (int k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            int j = A.col_indices[k];
            if (std::abs(A.values[k] - A.at(j, i)) > tol) return false;
        }
    return true;
}

EigEstimate lanczos_extremal(const CsrMatrix& A, int k, uint64_t seed) {
    if (A.nrows != A.ncols)
        throw std::invalid_argument("lanczos_extremal: matrix must be square");
    if (!is_symmetric(A, 1e-12))
        throw std::invalid_argument("lanczos_extremal: matrix must be symmetric");
    const int n = A.nrows;
    k = std::min(k, n);
    if (k < 1) throw std::invalid_argument("lanczos_extremal: k must be >= 1");

    Rng rng(seed);
    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta;
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    double nv = 0.0;
    for (double t : v) nv += t * t;
    nv = std::sqrt(nv);
    for (double& t : v) t /= nv;
    V.push_back(v);

    for (int j = 0; j < k; ++j) {
        spmv_into(A, V[j], w);
        double a = 0.0;
        for (int i = 0; i < n; ++i) a += w[i] * V[j][i];
        alpha.push_back(a);
        for (int i = 0; i < n; ++i) w[i] -= a * V[j][i];
        if (j > 0)
            for (int i = 0; i < n; ++i) w[i] -= beta[j - 1] * V[j - 1][i];
        // Full reorthogonalization; k is small everywhere this is used.
        for (const auto& u : V) {
            double d = 0.0;
            for (int i = 0; i < n; ++i) d += w[i] * u[i];
            for (int i = 0; i < n; ++i) w[i] -= d * u[i];
        }
        double nb = 0.0;
        for (double t : w) nb += t * t;
        nb = std::sqrt(nb);
        if (j + 1 < k) {
            if (nb < 1e-14) {
                k = j + 1;  // invariant subspace found; tridiagonal is exact
                break;
            }
            beta.push_back(nb);
            std::vector<double> next(n);
            for (int i = 0; i < n; ++i) next[i] = w[i] / nb;
            V.push_back(next);
        }
    }

    const int m = static_cast<int>(alpha.size());
    std::vector<std::vector<double>> T(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) {
        T[i][i] = alpha[i];
        if (i + 1 < m) T[i][i + 1] = T[i + 1][i] = beta[i];
    }
    std::vector<double> ev = sym_eigenvalues(std::move(T));
    return EigEstimate{ev.front(), ev.back(), m};
}

}  // namespace nows
