#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nows {

/// Deterministic RNG used everywhere randomness is needed. mt19937_64 has a
/// bit-exact specification and the transforms below avoid the
/// implementation-defined std:: distributions, so streams are reproducible
/// across platforms and toolchains for a given seed.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (polar-free variant; fixed algorithm).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0).
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Integer in [0, n).
    uint64_t below(uint64_t n) {
        // Rejection-free modulo is biased for huge n; fine for shuffles of
        // desk-scale arrays, but keep the rejection loop for correctness.
        uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
        uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace nows
