#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nows/fft.hpp"
#include "nows/rng.hpp"

using namespace nows;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Direct O(n^2) DFT oracle, forward convention (negative exponent).
std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<cplx> X(n);
    for (int k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (int j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, -2.0 * kPi * j * k / n);
        X[k] = acc;
    }
    return X;
}

GridField random_field_1d(int n, uint64_t seed) {
    GridField f = GridField::make_1d(n, 1.0 / n);
    Rng rng(seed);
    for (double& v : f.data) v = rng.normal();
    return f;
}

GridField random_field_2d(int n0, int n1, uint64_t seed) {
    GridField f = GridField::make_2d(n0, n1, 1.0 / n0, 1.0 / n1);
    Rng rng(seed);
    for (double& v : f.data) v = rng.normal();
    return f;
}

}  // namespace

TEST_CASE("constant field transforms to a single DC bin") {
    const double c = 2.5;
    for (int n : {8, 12}) {
        GridField f = GridField::make_1d(n, 1.0 / n);
        for (double& v : f.data) v = c;
        Spectrum s = fft_forward(f);
        CHECK(s.data[0].real() == doctest::Approx(c * n).epsilon(1e-12));
        CHECK(s.data[0].imag() == doctest::Approx(0.0).epsilon(1e-12));
        for (size_t k = 1; k < s.data.size(); ++k)
            CHECK(std::abs(s.data[k]) < 1e-10);
    }
}

TEST_CASE("single cosine mode lands on the +-1 bins") {
    const int n = 8;
    GridField f = GridField::make_1d(n, 1.0 / n);
    for (int i = 0; i < n; ++i) f.data[i] = std::cos(2.0 * kPi * i / n);
    Spectrum s = fft_forward(f);
    // Half-spectrum stores k = 0..n/2; the k=1 bin carries n/2 = 4.
    CHECK(s.data[1].real() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(s.data[0]) < 1e-12);
    CHECK(std::abs(s.data[2]) < 1e-12);

    // Against the O(n^2) DFT oracle.
    std::vector<cplx> xc(n);
    for (int i = 0; i < n; ++i) xc[i] = cplx(f.data[i], 0.0);
    std::vector<cplx> oracle = naive_dft(xc);
    for (int k = 0; k <= n / 2; ++k) {
        CHECK(s.data[k].real() == doctest::Approx(oracle[k].real()).epsilon(1e-10));
        CHECK(s.data[k].imag() == doctest::Approx(oracle[k].imag()).epsilon(1e-10));
    }
}

TEST_CASE("forward matches the naive DFT on awkward lengths") {
    for (int n : {5, 6, 13, 48}) {
        GridField f = random_field_1d(n, 100 + n);
        Spectrum s = fft_forward(f);
        std::vector<cplx> xc(n);
        for (int i = 0; i < n; ++i) xc[i] = cplx(f.data[i], 0.0);
        std::vector<cplx> oracle = naive_dft(xc);
        for (int k = 0; k <= n / 2; ++k)
            CHECK(std::abs(s.data[k] - oracle[k]) < 1e-9);
    }
}

TEST_CASE("inverse of forward is the identity") {
    for (int n : {4, 7, 16, 48}) {
        GridField f = random_field_1d(n, 7 * n);
        GridField back = fft_inverse(fft_forward(f), f.shape, 1);
        for (int i = 0; i < n; ++i)
            CHECK(back.data[i] == doctest::Approx(f.data[i]).epsilon(1e-12));
    }
    for (auto [n0, n1] : {std::pair{8, 8}, {12, 6}, {9, 16}}) {
        GridField f = random_field_2d(n0, n1, n0 * 31 + n1);
        GridField back = fft_inverse(fft_forward(f), f.shape, 2);
        for (size_t i = 0; i < f.size(); ++i)
            CHECK(back.data[i] == doctest::Approx(f.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("Parseval holds on randomized shapes") {
    Rng shapes(42);
    for (int trial = 0; trial < 6; ++trial) {
        int n0 = 2 + static_cast<int>(shapes.below(63));
        int n1 = 2 + static_cast<int>(shapes.below(63));
        GridField f = random_field_2d(n0, n1, 900 + trial);
        // Full-spectrum energy via the Hermitian half: double interior bins.
        Spectrum s = fft_forward(f);
        const int half = n1 / 2 + 1;
        double lhs = 0.0;
        for (double v : f.data) lhs += v * v;
        double rhs = 0.0;
        for (int i0 = 0; i0 < n0; ++i0)
            for (int k = 0; k < half; ++k) {
                double w = (k == 0 || 2 * k == n1) ? 1.0 : 2.0;
                rhs += w * std::norm(s.data[static_cast<size_t>(i0) * half + k]);
            }
        rhs /= static_cast<double>(n0) * n1;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("fft adjoint identities") {
    // <F x, y> = <x, F* y> with the real pairing, for all four transforms.
    Rng rng(5);
    for (int n : {8, 12}) {
        const int half = n / 2 + 1;
        std::vector<double> x(n);
        std::vector<cplx> y(half);
        for (double& v : x) v = rng.normal();
        for (cplx& v : y) v = cplx(rng.normal(), rng.normal());

        std::vector<cplx> Fx(half);
        fft::rfft(x.data(), n, Fx.data());
        std::vector<double> Fty(n);
        fft::rfft_adjoint(y.data(), n, Fty.data());
        double lhs = 0.0, rhs = 0.0;
        for (int k = 0; k < half; ++k)
            lhs += Fx[k].real() * y[k].real() + Fx[k].imag() * y[k].imag();
        for (int i = 0; i < n; ++i) rhs += x[i] * Fty[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

        std::vector<double> g(n);
        for (double& v : g) v = rng.normal();
        std::vector<double> Iy(n);
        fft::irfft(y.data(), n, Iy.data());
        std::vector<cplx> Itg(half);
        fft::irfft_adjoint(g.data(), n, Itg.data());
        lhs = 0.0;
        rhs = 0.0;
        for (int i = 0; i < n; ++i) lhs += Iy[i] * g[i];
        for (int k = 0; k < half; ++k)
            rhs += y[k].real() * Itg[k].real() + y[k].imag() * Itg[k].imag();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("2d fft adjoint identities") {
    Rng rng(6);
    const int n0 = 6, n1 = 8;
    const int half = n1 / 2 + 1;
    std::vector<double> x(static_cast<size_t>(n0) * n1);
    std::vector<cplx> y(static_cast<size_t>(n0) * half);
    for (double& v : x) v = rng.normal();
    for (cplx& v : y) v = cplx(rng.normal(), rng.normal());

    std::vector<cplx> Fx(y.size());
    fft::rfft2(x.data(), n0, n1, Fx.data());
    std::vector<double> Fty(x.size());
    fft::rfft2_adjoint(y.data(), n0, n1, Fty.data());
    double lhs = 0.0, rhs = 0.0;
    for (size_t k = 0; k < y.size(); ++k)
        lhs += Fx[k].real() * y[k].real() + Fx[k].imag() * y[k].imag();
    for (size_t i = 0; i < x.size(); ++i) rhs += x[i] * Fty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    std::vector<double> g(x.size());
    for (double& v : g) v = rng.normal();
    std::vector<double> Iy(x.size());
    fft::irfft2(y.data(), n0, n1, Iy.data());
    std::vector<cplx> Itg(y.size());
    fft::irfft2_adjoint(g.data(), n0, n1, Itg.data());
    lhs = 0.0;
    rhs = 0.0;
    for (size_t i = 0; i < x.size(); ++i) lhs += Iy[i] * g[i];
    for (size_t k = 0; k < y.size(); ++k)
        rhs += y[k].real() * Itg[k].real() + y[k].imag() * Itg[k].imag();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("inverse shape mismatch is an error") {
    GridField f = random_field_1d(8, 1);
    Spectrum s = fft_forward(f);
    CHECK_THROWS(fft_inverse(s, {16, 1}, 1));
}
