#ifndef TWINCORR_RATES_HPP
#define TWINCORR_RATES_HPP

// Ideal coincidence rates in the delta-approximation, plus the
// advanced-wave cross-check path and Poisson counting.
//
// Momentum is measured relative to the beam axis: pixel p has
// k(p) = (p - beam_center) * pitch, and the crystal filter weight is
// exp(-2 |k|^2 sigma_minus^2). The sum runs over pixels inside the beam
// disk; rates are normalized so the flat-phase, dx = 0 value is exactly 1.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "twincorr/grid.hpp"
#include "twincorr/model.hpp"
#include "twincorr/rng.hpp"

namespace twincorr {

// Beam-disk pixel table shared by the rate evaluations. Pixel order is
// row-major and fixed; normalization reuses the same accumulation order so
// the flat-phase anchor is exact.
struct BeamGeometry {
    struct Px {
        int x, y;   // pixel
        int mx, my; // mirror pixel about the beam center
        double kx, ky;
        double w;   // exp(-2 k^2 sigma_minus^2)
    };
    std::vector<Px> px;
    double weight_sum = 0.0;

    explicit BeamGeometry(const TwinPhotonModel& m) {
        m.validate();
        const int n = m.spec.n;
        const double r2 = m.beam_radius * m.beam_radius;
        const double s2 = 2.0 * m.sigma_minus * m.sigma_minus;
        px.reserve(static_cast<std::size_t>(r2 * 3.2) + 16);
        for (int y = 0; y < n; ++y) {
            const double dy = y - m.beam_center.cy;
            for (int x = 0; x < n; ++x) {
                const double dx = x - m.beam_center.cx;
                if (dx * dx + dy * dy > r2) continue;
                Px p;
                p.x = x;
                p.y = y;
                p.mx = mirror_index(m.beam_center.cx, x);
                p.my = mirror_index(m.beam_center.cy, y);
                p.kx = dx * m.spec.pitch;
                p.ky = dy * m.spec.pitch;
                p.w = std::exp(-s2 * (p.kx * p.kx + p.ky * p.ky));
                px.push_back(p);
                weight_sum += p.w;
            }
        }
    }
};

// |sum_k w(k) exp(i k.dx) exp(i (phi(k) + phi(mirror k)))|^2 / (sum_k w)^2.
// Only the even part of the phase enters: the odd part cancels in
// phi(k) + phi(mirror k).
template <class PhaseFn>
double rate_delta_fn(const BeamGeometry& g, PhaseFn&& phase, Vec2 dx) {
    double re = 0.0, im = 0.0;
    for (const auto& p : g.px) {
        const double arg = p.kx * dx.x + p.ky * dx.y + phase(p.x, p.y) + phase(p.mx, p.my);
        re += p.w * std::cos(arg);
        im += p.w * std::sin(arg);
    }
    const double z = g.weight_sum * g.weight_sum;
    return (re * re + im * im) / z;
}

inline double rate_delta(const TwinPhotonModel& m, const PhaseScreen& total_phase, Vec2 dx) {
    if (!(total_phase.spec == m.spec))
        throw ConfigError("rate_delta: phase screen does not match model grid");
    BeamGeometry g(m);
    return rate_delta_fn(g, [&](int x, int y) { return total_phase.at(x, y); }, dx);
}

// Advanced-wave path: plane-wave spectrum from detector 1, first screen
// pass at the mirrored pixel, crystal mirror with the sigma_minus filter,
// second screen pass, projection onto detector 2. Same quantity as
// rate_delta computed through staged field arrays.
inline double rate_klyshko(const TwinPhotonModel& m, const PhaseScreen& total_phase, Vec2 dx) {
    if (!(total_phase.spec == m.spec))
        throw ConfigError("rate_klyshko: phase screen does not match model grid");
    const Vec2 x1 = dx;           // detector 1 position
    const Vec2 x2{0.0, 0.0};      // detector 2 position
    BeamGeometry g(m);
    const std::size_t n = g.px.size();
    std::vector<std::complex<double>> field(n);
    // launch: the advanced wave that exits as mode k came in as mode -k
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = g.px[i];
        field[i] = std::polar(1.0, p.kx * x1.x + p.ky * x1.y);
    }
    // first pass through the screen (incoming branch samples the mirror pixel)
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = g.px[i];
        field[i] *= std::polar(1.0, total_phase.at(p.mx, p.my));
    }
    // crystal mirror with amplitude filter
    for (std::size_t i = 0; i < n; ++i) field[i] *= g.px[i].w;
    // second pass through the screen
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = g.px[i];
        field[i] *= std::polar(1.0, total_phase.at(p.x, p.y));
    }
    // project onto detector 2
    std::complex<double> amp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = g.px[i];
        amp += field[i] * std::polar(1.0, -(p.kx * x2.x + p.ky * x2.y));
    }
    return std::norm(amp) / (g.weight_sum * g.weight_sum);
}

// rate_delta sampled on a (2*half+1)^2 lattice of difference coordinates
// spaced dpitch, as a flat row-major table. Separable two-stage transform
// over the beam disk; table[center] equals the dx = 0 rate.
inline std::vector<double> delta_rate_table(const BeamGeometry& g, const PhaseScreen& phase,
                                            int half, double dpitch) {
    const int m = 2 * half + 1;
    // group disk pixels by row
    std::vector<std::complex<double>> row_sum; // [row][dxi]
    std::vector<int> row_ids;
    std::vector<double> row_ky;
    {
        std::size_t i = 0;
        while (i < g.px.size()) {
            const int y = g.px[i].y;
            std::vector<std::complex<double>> acc(m, 0.0);
            const double ky = g.px[i].ky;
            while (i < g.px.size() && g.px[i].y == y) {
                const auto& p = g.px[i];
                const double ph = phase.at(p.x, p.y) + phase.at(p.mx, p.my);
                for (int dxi = 0; dxi < m; ++dxi) {
                    const double ddx = (dxi - half) * dpitch;
                    acc[dxi] += p.w * std::polar(1.0, p.kx * ddx + ph);
                }
                ++i;
            }
            row_sum.insert(row_sum.end(), acc.begin(), acc.end());
            row_ids.push_back(y);
            row_ky.push_back(ky);
        }
    }
    const double z = g.weight_sum * g.weight_sum;
    std::vector<double> table(static_cast<std::size_t>(m) * m);
    for (int dyi = 0; dyi < m; ++dyi) {
        const double ddy = (dyi - half) * dpitch;
        for (int dxi = 0; dxi < m; ++dxi) {
            std::complex<double> amp = 0.0;
            for (std::size_t r = 0; r < row_ids.size(); ++r)
                amp += row_sum[r * m + dxi] * std::polar(1.0, row_ky[r] * ddy);
            table[static_cast<std::size_t>(dyi) * m + dxi] = std::norm(amp) / z;
        }
    }
    return table;
}

// Poisson coincidence counting over an integration window.
inline long long sample_counts(double rate, const DetectionModel& det, double window,
                               std::uint64_t stream_key) {
    if (!(rate >= 0.0)) throw std::domain_error("sample_counts: negative rate");
    det.validate();
    if (!(window > 0.0)) throw std::domain_error("sample_counts: window must be > 0");
    RngStream rng(stream_key);
    return rng.poisson(rate * det.kappa * window);
}

} // namespace twincorr

#endif
