#include <cmath>

#include "nows/fem.hpp"
#include "nows/problems.hpp"

namespace nows {

namespace {

// 1D linear-element stiffness/mass on [-a, a]; node 0 at -a, node 1 at +a.
void line_matrices(double a, double k[2][2], double m[2][2]) {
    k[0][0] = k[1][1] = 1.0 / (2.0 * a);
    k[0][1] = k[1][0] = -1.0 / (2.0 * a);
    m[0][0] = m[1][1] = 2.0 * a / 3.0;
    m[0][1] = m[1][0] = a / 3.0;
}

// Local node -> (x index, y index) for the N1..N4 corner ordering.
constexpr int kXi[4] = {0, 1, 1, 0};
constexpr int kYi[4] = {0, 0, 1, 1};

}  // namespace

ElemMat element_stiffness(double a, double b) {
    double kx[2][2], mx[2][2], ky[2][2], my[2][2];
    line_matrices(a, kx, mx);
    line_matrices(b, ky, my);
    ElemMat K{};
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            K[p][q] = kx[kXi[p]][kXi[q]] * my[kYi[p]][kYi[q]] +
                      mx[kXi[p]][kXi[q]] * ky[kYi[p]][kYi[q]];
    return K;
}

ElemMat element_mass(double a, double b) {
    double kx[2][2], mx[2][2], ky[2][2], my[2][2];
    line_matrices(a, kx, mx);
    line_matrices(b, ky, my);
    ElemMat M{};
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            M[p][q] = mx[kXi[p]][kXi[q]] * my[kYi[p]][kYi[q]];
    return M;
}

GridField element_average(const GridField& nodal) {
    nodal.check();
    if (nodal.dims != 2)
        throw std::invalid_argument("element_average: 2D field required");
    const int n0 = nodal.shape[0], n1 = nodal.shape[1];
    GridField e = GridField::make_2d(n0 - 1, n1 - 1, nodal.spacing[0],
                                     nodal.spacing[1],
                                     nodal.origin[0] + 0.5 * nodal.spacing[0],
                                     nodal.origin[1] + 0.5 * nodal.spacing[1]);
    for (int iy = 0; iy + 1 < n0; ++iy)
        for (int ix = 0; ix + 1 < n1; ++ix)
            e.at(iy, ix) = 0.25 * (nodal.at(iy, ix) + nodal.at(iy, ix + 1) +
                                   nodal.at(iy + 1, ix) + nodal.at(iy + 1, ix + 1));
    return e;
}

ProblemInstance assemble_darcy_fem(const GridField& a_elem, int n) {
    a_elem.check();
    if (n < 2) throw std::invalid_argument("assemble_darcy_fem: n >= 2");
    if (a_elem.dims != 2 || a_elem.shape[0] != n || a_elem.shape[1] != n)
        throw std::invalid_argument("assemble_darcy_fem: a_elem must be n x n");
    for (double v : a_elem.data)
        if (!(v > 0.0))
            throw std::invalid_argument("assemble_darcy_fem: non-positive coefficient");

    const double h = 1.0 / n;
    const int ni = n - 1;  // interior nodes per axis
    const ElemMat K = element_stiffness(0.5 * h, 0.5 * h);
    const ElemMat M = element_mass(0.5 * h, 0.5 * h);

    // Interior unknown index of global node (iy, ix), or -1 on the boundary.
    auto dof = [&](int iy, int ix) -> int {
        if (iy <= 0 || iy >= n || ix <= 0 || ix >= n) return -1;
        return (iy - 1) * ni + (ix - 1);
    };

    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(n) * n * 16);
    std::vector<double> b(static_cast<size_t>(ni) * ni, 0.0);
    for (int ey = 0; ey < n; ++ey)
        for (int ex = 0; ex < n; ++ex) {
            double a = a_elem.at(ey, ex);
            // Corner nodes in N1..N4 order: x varies first.
            int gx[4] = {ex, ex + 1, ex + 1, ex};
            int gy[4] = {ey, ey, ey + 1, ey + 1};
            for (int p = 0; p < 4; ++p) {
                int dp = dof(gy[p], gx[p]);
                if (dp < 0) continue;
                double load = 0.0;
                for (int q = 0; q < 4; ++q) {
                    load += M[p][q];  // f = 1 at every node
                    int dq = dof(gy[q], gx[q]);
                    if (dq >= 0) trips.push_back({dp, dq, a * K[p][q]});
                }
                b[dp] += load;
            }
        }

    ProblemInstance inst;
    inst.kind = ProblemKind::darcy;
    inst.A = csr_from_triplets(trips, ni * ni, ni * ni);
    inst.b = std::move(b);
    inst.solution_grid = GridField::make_2d(ni, ni, h, h, h, h);
    inst.input_field = a_elem;
    return inst;
}

}  // namespace nows
