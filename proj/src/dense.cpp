#include "nows/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nows {

std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                std::span<const double> b) {
    const int n = static_cast<int>(A.size());
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("dense_solve: matrix must be square");
    if (b.size() != static_cast<size_t>(n))
        throw std::invalid_argument("dense_solve: rhs length mismatch");

    double amax = 0.0;
    for (const auto& row : A)
        for (double v : row) amax = std::max(amax, std::abs(v));
    const double tiny = std::max(amax, 1.0) * 1e-14;

    std::vector<double> x(b.begin(), b.end());
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;

    for (int col = 0; col < n; ++col) {
        int p = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[p][col])) p = r;
        if (std::abs(A[p][col]) <= tiny)
            throw std::runtime_error("dense_solve: singular to working precision");
        if (p != col) {
            std::swap(A[p], A[col]);
            std::swap(x[p], x[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            double m = A[r][col] / A[col][col];
            A[r][col] = 0.0;
            if (m == 0.0) continue;
            for (int c = col + 1; c < n; ++c) A[r][c] -= m * A[col][c];
            x[r] -= m * x[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = x[r];
        for (int c = r + 1; c < n; ++c) acc -= A[r][c] * x[c];
        x[r] = acc / A[r][r];
    }
    return x;
}

std::vector<double> sym_eigenvalues(std::vector<std::vector<double>> A,
                                    double tol, int max_sweeps) {
    const int n = static_cast<int>(A.size());
    if (n == 0) return {};
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("sym_eigenvalues: matrix must be square");

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(A[i][j]));
    if (scale == 0.0) return std::vector<double>(n, 0.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += A[i][j] * A[i][j];
        if (std::sqrt(off) <= tol * scale * n) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(A[p][q]) <= tol * scale) continue;
                double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace nows
