#include <cmath>

#include "nows/krylov.hpp"
#include "nows/problems.hpp"

namespace nows {

const char* problem_name(ProblemKind k) {
    switch (k) {
        case ProblemKind::poisson: return "poisson";
        case ProblemKind::darcy: return "darcy";
        case ProblemKind::burgers: return "burgers";
        case ProblemKind::smoke: return "smoke";
    }
    return "?";
}

ProblemKind problem_from_name(const std::string& name) {
    if (name == "poisson") return ProblemKind::poisson;
    if (name == "darcy") return ProblemKind::darcy;
    if (name == "burgers") return ProblemKind::burgers;
    if (name == "smoke") return ProblemKind::smoke;
    throw std::invalid_argument("unknown problem: " + name);
}

double ProblemInstance::reference_residual() const {
    if (!reference) return 0.0;
    std::vector<double> r = spmv(A, *reference);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        double d = b[i] - r[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

ProblemInstance assemble_poisson_fd(int n) {
    if (n < 1) throw std::invalid_argument("assemble_poisson_fd: n >= 1");
    const double h = 1.0 / (n + 1);
    const double inv_h2 = 1.0 / (h * h);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(n) * n * 5);
    auto id = [n](int iy, int ix) { return iy * n + ix; };
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            int c = id(iy, ix);
            trips.push_back({c, c, 4.0 * inv_h2});
            if (ix > 0) trips.push_back({c, id(iy, ix - 1), -inv_h2});
            if (ix + 1 < n) trips.push_back({c, id(iy, ix + 1), -inv_h2});
            if (iy > 0) trips.push_back({c, id(iy - 1, ix), -inv_h2});
            if (iy + 1 < n) trips.push_back({c, id(iy + 1, ix), -inv_h2});
        }
    ProblemInstance inst;
    inst.kind = ProblemKind::poisson;
    inst.A = csr_from_triplets(trips, n * n, n * n);
    inst.b.assign(static_cast<size_t>(n) * n, 0.0);
    inst.solution_grid = GridField::make_2d(n, n, h, h, h, h);
    inst.input_field = inst.solution_grid;
    return inst;
}

}  // namespace nows
