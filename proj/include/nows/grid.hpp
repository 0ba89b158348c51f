#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nows {

/// Nodal field on a uniform 1D or 2D grid. Data is row-major: for 2D,
/// index = i0*shape[1] + i1 where axis 0 is y (rows) and axis 1 is x (cols).
/// Node coordinates along axis d are origin[d] + i*spacing[d].
struct GridField {
    int dims = 1;
    std::array<int, 2> shape{0, 1};
    std::array<double, 2> spacing{0.0, 0.0};
    std::array<double, 2> origin{0.0, 0.0};
    std::vector<double> data;

    GridField() = default;

    static GridField make_1d(int n, double h, double x0 = 0.0) {
        GridField f;
        f.dims = 1;
        f.shape = {n, 1};
        f.spacing = {h, 0.0};
        f.origin = {x0, 0.0};
        f.data.assign(static_cast<size_t>(n), 0.0);
        f.check();
        return f;
    }

    static GridField make_2d(int n0, int n1, double h0, double h1,
                             double y0 = 0.0, double x0 = 0.0) {
        GridField f;
        f.dims = 2;
        f.shape = {n0, n1};
        f.spacing = {h0, h1};
        f.origin = {y0, x0};
        f.data.assign(static_cast<size_t>(n0) * n1, 0.0);
        f.check();
        return f;
    }

    size_t size() const { return data.size(); }

    double& at(int i0, int i1 = 0) {
        return data[static_cast<size_t>(i0) * shape[1] + i1];
    }
    double at(int i0, int i1 = 0) const {
        return data[static_cast<size_t>(i0) * shape[1] + i1];
    }

    /// Coordinate of node i along axis d.
    double coord(int d, int i) const { return origin[d] + spacing[d] * i; }

    void check() const {
        if (dims != 1 && dims != 2)
            throw std::invalid_argument("GridField: dims must be 1 or 2");
        size_t expect = static_cast<size_t>(shape[0]) * (dims == 2 ? shape[1] : 1);
        if (dims == 1 && shape[1] != 1)
            throw std::invalid_argument("GridField: 1D field must have shape[1] == 1");
        if (data.size() != expect)
            throw std::invalid_argument("GridField: data length != product(shape)");
        for (int d = 0; d < dims; ++d)
            if (spacing[d] <= 0.0)
                throw std::invalid_argument("GridField: spacing must be > 0");
    }
};

/// Half-spectrum of a real field (last axis truncated to n/2+1 bins, the
/// remaining bins implied by Hermitian symmetry). shape stores the spatial
/// shape of the originating field.
struct Spectrum {
    int dims = 1;
    std::array<int, 2> shape{0, 1};
    std::vector<std::complex<double>> data;

    int half_len() const { return (dims == 1 ? shape[0] : shape[1]) / 2 + 1; }
    size_t expected_size() const {
        return dims == 1 ? static_cast<size_t>(half_len())
                         : static_cast<size_t>(shape[0]) * half_len();
    }
};

}  // namespace nows
