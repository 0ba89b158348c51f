#include "nows/fft.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace nows::fft {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct Radix2Plan {
    int n = 0;
    std::vector<int> bitrev;
    // Forward (sign = -1) twiddles, one flat table: for stage with half-size
    // m, entries [m .. 2m) hold exp(-2*pi*i*j/(2m)), j = 0..m-1.
    std::vector<cplx> tw;

    explicit Radix2Plan(int n_) : n(n_), bitrev(n_) {
        int logn = 0;
        while ((1 << logn) < n) ++logn;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < logn; ++b)
                if (i & (1 << b)) r |= 1 << (logn - 1 - b);
            bitrev[i] = r;
        }
        tw.assign(n, cplx(1.0, 0.0));
        for (int m = 1; m < n; m <<= 1)
            for (int j = 0; j < m; ++j)
                tw[m + j] = std::polar(1.0, -kPi * j / m);
    }
};

const Radix2Plan& radix2_plan(int n) {
    thread_local std::unordered_map<int, Radix2Plan> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Radix2Plan(n)).first;
    return it->second;
}

void cfft_pow2(cplx* a, int n, int sign) {
    const Radix2Plan& plan = radix2_plan(n);
    for (int i = 0; i < n; ++i) {
        int j = plan.bitrev[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int m = 1; m < n; m <<= 1) {
        const cplx* w = plan.tw.data() + m;
        for (int base = 0; base < n; base += 2 * m) {
            for (int j = 0; j < m; ++j) {
                cplx wj = sign < 0 ? w[j] : std::conj(w[j]);
                cplx t = wj * a[base + m + j];
                cplx u = a[base + j];
                a[base + j] = u + t;
                a[base + m + j] = u - t;
            }
        }
    }
}

struct BluesteinPlan {
    int n = 0;
    int m = 0;                  // padded power-of-two length >= 2n-1
    std::vector<cplx> chirp;    // w_j = exp(-pi*i*j^2/n), forward sign
    std::vector<cplx> filt_fw;  // FFT of wrapped conj(chirp), length m

    explicit BluesteinPlan(int n_) : n(n_) {
        m = 1;
        while (m < 2 * n - 1) m <<= 1;
        chirp.resize(n);
        for (int j = 0; j < n; ++j) {
            // j^2 mod 2n keeps the phase argument small and exact.
            long long q = (static_cast<long long>(j) * j) % (2LL * n);
            chirp[j] = std::polar(1.0, -kPi * static_cast<double>(q) / n);
        }
        filt_fw.assign(m, cplx(0.0, 0.0));
        filt_fw[0] = std::conj(chirp[0]);
        for (int j = 1; j < n; ++j) {
            filt_fw[j] = std::conj(chirp[j]);
            filt_fw[m - j] = std::conj(chirp[j]);
        }
        cfft_pow2(filt_fw.data(), m, -1);
    }
};

const BluesteinPlan& bluestein_plan(int n) {
    thread_local std::unordered_map<int, BluesteinPlan> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, BluesteinPlan(n)).first;
    return it->second;
}

void cfft_bluestein(cplx* a, int n, int sign) {
    const BluesteinPlan& plan = bluestein_plan(n);
    const int m = plan.m;
    std::vector<cplx> buf(m, cplx(0.0, 0.0));
    for (int j = 0; j < n; ++j) {
        cplx w = sign < 0 ? plan.chirp[j] : std::conj(plan.chirp[j]);
        buf[j] = a[j] * w;
    }
    cfft_pow2(buf.data(), m, -1);
    if (sign < 0) {
        for (int j = 0; j < m; ++j) buf[j] *= plan.filt_fw[j];
    } else {
        // Filter for the +1 sign is the conjugate chirp; its FFT is the
        // conjugate-reversed spectrum of filt_fw.
        for (int j = 0; j < m; ++j) {
            cplx f = std::conj(plan.filt_fw[j == 0 ? 0 : m - j]);
            buf[j] *= f;
        }
    }
    cfft_pow2(buf.data(), m, +1);
    double inv_m = 1.0 / m;
    for (int k = 0; k < n; ++k) {
        cplx w = sign < 0 ? plan.chirp[k] : std::conj(plan.chirp[k]);
        a[k] = buf[k] * inv_m * w;
    }
}

}  // namespace

void cfft(cplx* a, int n, int sign) {
    if (n <= 1) return;
    if (is_pow2(n))
        cfft_pow2(a, n, sign);
    else
        cfft_bluestein(a, n, sign);
}

void rfft(const double* x, int n, cplx* out) {
    std::vector<cplx> buf(n);
    for (int i = 0; i < n; ++i) buf[i] = cplx(x[i], 0.0);
    cfft(buf.data(), n, -1);
    std::memcpy(out, buf.data(), sizeof(cplx) * (n / 2 + 1));
}

void irfft(const cplx* X, int n, double* out) {
    const int half = n / 2 + 1;
    std::vector<cplx> buf(n);
    for (int k = 0; k < half; ++k) buf[k] = X[k];
    for (int k = half; k < n; ++k) buf[k] = std::conj(X[n - k]);
    // Self-conjugate bins must be real for an exactly real result.
    buf[0] = cplx(buf[0].real(), 0.0);
    if (n % 2 == 0) buf[n / 2] = cplx(buf[n / 2].real(), 0.0);
    cfft(buf.data(), n, +1);
    double inv_n = 1.0 / n;
    for (int i = 0; i < n; ++i) out[i] = buf[i].real() * inv_n;
}

void rfft2(const double* x, int n0, int n1, cplx* out) {
    const int half = n1 / 2 + 1;
    for (int i = 0; i < n0; ++i) rfft(x + static_cast<size_t>(i) * n1, n1, out + static_cast<size_t>(i) * half);
    std::vector<cplx> col(n0);
    for (int j = 0; j < half; ++j) {
        for (int i = 0; i < n0; ++i) col[i] = out[static_cast<size_t>(i) * half + j];
        cfft(col.data(), n0, -1);
        for (int i = 0; i < n0; ++i) out[static_cast<size_t>(i) * half + j] = col[i];
    }
}

void irfft2(const cplx* X, int n0, int n1, double* out) {
    const int half = n1 / 2 + 1;
    std::vector<cplx> work(static_cast<size_t>(n0) * half);
    std::vector<cplx> col(n0);
    double inv_n0 = 1.0 / n0;
    for (int j = 0; j < half; ++j) {
        for (int i = 0; i < n0; ++i) col[i] = X[static_cast<size_t>(i) * half + j];
        cfft(col.data(), n0, +1);
        for (int i = 0; i < n0; ++i) work[static_cast<size_t>(i) * half + j] = col[i] * inv_n0;
    }
    for (int i = 0; i < n0; ++i) irfft(work.data() + static_cast<size_t>(i) * half, n1, out + static_cast<size_t>(i) * n1);
}

void rfft_adjoint(const cplx* gbar, int n, double* xbar) {
    const int half = n / 2 + 1;
    std::vector<cplx> buf(n, cplx(0.0, 0.0));
    for (int k = 0; k < half; ++k) buf[k] = gbar[k];
    cfft(buf.data(), n, +1);
    for (int i = 0; i < n; ++i) xbar[i] = buf[i].real();
}

void irfft_adjoint(const double* gbar, int n, cplx* Xbar) {
    const int half = n / 2 + 1;
    std::vector<cplx> buf(n);
    for (int i = 0; i < n; ++i) buf[i] = cplx(gbar[i], 0.0);
    cfft(buf.data(), n, -1);
    double inv_n = 1.0 / n;
    for (int k = 0; k < half; ++k) {
        double c = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
        Xbar[k] = buf[k] * (c * inv_n);
    }
}

void rfft2_adjoint(const cplx* gbar, int n0, int n1, double* xbar) {
    // rfft2 = Fcols o rfft_rows; adjoint applies Fcols^H (positive-exponent,
    // unnormalized) then the per-row rfft adjoint.
    const int half = n1 / 2 + 1;
    std::vector<cplx> work(static_cast<size_t>(n0) * half);
    std::vector<cplx> col(n0);
    for (int j = 0; j < half; ++j) {
        for (int i = 0; i < n0; ++i) col[i] = gbar[static_cast<size_t>(i) * half + j];
        cfft(col.data(), n0, +1);
        for (int i = 0; i < n0; ++i) work[static_cast<size_t>(i) * half + j] = col[i];
    }
    for (int i = 0; i < n0; ++i)
        rfft_adjoint(work.data() + static_cast<size_t>(i) * half, n1, xbar + static_cast<size_t>(i) * n1);
}

void irfft2_adjoint(const double* gbar, int n0, int n1, cplx* Xbar) {
    // irfft2 = irfft_rows o invFcols; adjoint applies the per-row irfft
    // adjoint then invFcols^H = (1/n0) * negative-exponent transform.
    const int half = n1 / 2 + 1;
    for (int i = 0; i < n0; ++i)
        irfft_adjoint(gbar + static_cast<size_t>(i) * n1, n1, Xbar + static_cast<size_t>(i) * half);
    std::vector<cplx> col(n0);
    double inv_n0 = 1.0 / n0;
    for (int j = 0; j < half; ++j) {
        for (int i = 0; i < n0; ++i) col[i] = Xbar[static_cast<size_t>(i) * half + j];
        cfft(col.data(), n0, -1);
        for (int i = 0; i < n0; ++i) Xbar[static_cast<size_t>(i) * half + j] = col[i] * inv_n0;
    }
}

}  // namespace nows::fft

namespace nows {

Spectrum fft_forward(const GridField& field) {
    field.check();
    Spectrum s;
    s.dims = field.dims;
    s.shape = field.shape;
    if (field.dims == 1) {
        s.data.resize(field.shape[0] / 2 + 1);
        fft::rfft(field.data.data(), field.shape[0], s.data.data());
    } else {
        s.data.resize(static_cast<size_t>(field.shape[0]) * (field.shape[1] / 2 + 1));
        fft::rfft2(field.data.data(), field.shape[0], field.shape[1], s.data.data());
    }
    return s;
}

GridField fft_inverse(const Spectrum& spec, const std::array<int, 2>& shape,
                      int dims) {
    if (dims != spec.dims || shape[0] != spec.shape[0] ||
        (dims == 2 && shape[1] != spec.shape[1]))
        throw std::invalid_argument("fft_inverse: shape mismatch");
    if (spec.data.size() != spec.expected_size())
        throw std::invalid_argument("fft_inverse: spectrum size inconsistent");
    if (dims == 1) {
        GridField f = GridField::make_1d(shape[0], 1.0);
        fft::irfft(spec.data.data(), shape[0], f.data.data());
        return f;
    }
    GridField f = GridField::make_2d(shape[0], shape[1], 1.0, 1.0);
    fft::irfft2(spec.data.data(), shape[0], shape[1], f.data.data());
    return f;
}

}  // namespace nows
