#ifndef TWINCORR_RNG_HPP
#define TWINCORR_RNG_HPP

// Counter-based random streams. Every draw site owns a stream keyed by
// (master seed, run, generation, individual, purpose), so results are
// identical under any evaluation schedule. The generator layout is part of
// the reproducibility contract; do not swap in std:: distributions.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace twincorr {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Keyed hash folding an id list into a stream key.
inline std::uint64_t derive_stream(std::uint64_t root, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = mix64(root ^ 0x6A09E667F3BCC909ull);
    for (std::uint64_t id : ids)
        h = mix64(h ^ (id + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
    return h;
}

// Purpose tags keep sibling streams apart without string plumbing.
namespace purpose {
inline constexpr std::uint64_t kDiffuser = 0xD1FF05E1ull;
inline constexpr std::uint64_t kInit     = 0x1A171A17ull;
inline constexpr std::uint64_t kFitness  = 0xF17F17F1ull;
inline constexpr std::uint64_t kChild    = 0xC41DC41Dull;
inline constexpr std::uint64_t kBaseline = 0xBA5EBA5Eull;
inline constexpr std::uint64_t kFinalBest = 0xF1BE57ull;
inline constexpr std::uint64_t kFinalFlat = 0xF1F1A7ull;
inline constexpr std::uint64_t kEmccd    = 0xE3CCDull;
inline constexpr std::uint64_t kFrame    = 0xF3A3Eull;
inline constexpr std::uint64_t kScan     = 0x5CA4ull;
inline constexpr std::uint64_t kRun      = 0x4BD2ull;
inline constexpr std::uint64_t kScreen   = 0x5C4EE4ull;
} // namespace purpose

class RngStream {
public:
    explicit RngStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull; // splitmix64 increment
        return mix64(state_);
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in {0, ..., n-1} by rejection (exact, unbiased).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t u;
        do { u = next_u64(); } while (u >= limit);
        return u % n;
    }

    // Box-Muller; consumes two uniforms per call.
    double normal() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
        const double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Poisson draw: sequential inversion for small means, Hormann's PTRS
    // transformed rejection above.
    long long poisson(double mean) {
        if (!(mean >= 0.0)) throw std::domain_error("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    long long poisson_inversion(double mean) {
        const double q = std::exp(-mean);
        long long k = 0;
        double p = 1.0;
        do {
            p *= unit();
            ++k;
        } while (p > q);
        return k - 1;
    }

    long long poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = unit() - 0.5;
            const double v = unit();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            const double rhs = -mean + kf * loglam - std::lgamma(kf + 1.0);
            if (lhs <= rhs) return static_cast<long long>(kf);
        }
    }

    std::uint64_t state_;
};

} // namespace twincorr

#endif
