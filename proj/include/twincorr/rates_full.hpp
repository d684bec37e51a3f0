#ifndef TWINCORR_RATES_FULL_HPP
#define TWINCORR_RATES_FULL_HPP

// Finite-sigma_plus coincidence rates from the full double-Gaussian
// two-photon amplitude:
//   |sum_{k1,k2} e^{i(k1 x1 + k2 x2)} e^{-(k1+k2)^2 sp^2/2}
//                e^{-(k1-k2)^2 sm^2/2} e^{i(phi(k1)+phi(k2))}|^2,
// normalized to 1 at flat phase and x1 = x2 = 0.
//
// The double sum is O(m^2) in the number of in-beam modes, so the 2D
// variant is capped; detector-displacement studies run on the 1D lane.

#include <cmath>
#include <complex>
#include <vector>

#include "twincorr/errors.hpp"
#include "twincorr/grid.hpp"
#include "twincorr/model.hpp"
#include "twincorr/rng.hpp"

namespace twincorr {

inline constexpr int kFull1dMaxN = 512;
inline constexpr int kFull2dMaxN = 48;

// Defaults sit in the continuum-sampled regime: the sum-coordinate
// envelope width 1/sigma_plus must exceed the k-lattice spacing (pitch),
// i.e. sigma_plus * pitch <~ 0.65, or the finite-sigma_plus physics
// (envelope decay with detector displacement, tilt compensation)
// degenerates to the delta limit. At ratio 69 that needs a beam of
// >~ 106 pixels radius.
struct BeamModel1D {
    int n = 256;
    double pitch = 1.0;
    double center = 127.5;      // beam axis, pixels
    double beam_radius = 110.0; // pixels
    double sigma_plus = 69.0 / 110.0;
    double sigma_minus = 1.0 / 110.0;

    void validate() const {
        if (n < 8) throw ConfigError("BeamModel1D: n must be >= 8");
        if (n > kFull1dMaxN)
            throw CapError("BeamModel1D: n exceeds the 1D cap (" + std::to_string(kFull1dMaxN) +
                           "); shrink the grid");
        if (!(pitch > 0.0)) throw ConfigError("BeamModel1D: pitch must be > 0");
        if (!(sigma_plus > sigma_minus && sigma_minus > 0.0))
            throw ConfigError("BeamModel1D: need sigma_plus > sigma_minus > 0");
        const double m = beam_radius + 1.0;
        if (!(beam_radius > 0.0) || center - m < 0.0 || center + m > n - 1)
            throw ConfigError("BeamModel1D: beam segment (plus mirror margin) not inside grid");
    }
};

inline std::vector<double> make_diffuser_1d(const BeamModel1D& m, const DiffuserSpec& d) {
    m.validate();
    d.validate();
    std::vector<double> v(static_cast<std::size_t>(m.n), 0.0);
    if (d.phase_std == 0.0) return v;
    RngStream rng(derive_stream(d.seed, {purpose::kDiffuser, 1}));
    for (double& x : v) x = rng.normal();
    const double w = d.corr_len / std::sqrt(2.0);
    int half = static_cast<int>(std::ceil(3.5 * w));
    if (half > m.n / 2) half = m.n / 2;
    std::vector<double> kernel(2 * half + 1);
    for (int i = -half; i <= half; ++i)
        kernel[i + half] = std::exp(-(static_cast<double>(i) * i) / (w * w));
    std::vector<double> out(v.size());
    for (int x = 0; x < m.n; ++x) {
        double acc = 0.0;
        for (int i = -half; i <= half; ++i) {
            int xx = x + i;
            xx -= m.n * static_cast<int>(std::floor(static_cast<double>(xx) / m.n));
            acc += kernel[i + half] * v[xx];
        }
        out[x] = acc;
    }
    detail::normalize_screen(out, d.phase_std);
    return out;
}

struct Parity1D {
    std::vector<double> even, odd;
};

inline Parity1D parity_split_1d(const std::vector<double>& s, double center) {
    const int n = static_cast<int>(s.size());
    Parity1D out{std::vector<double>(s.size()), std::vector<double>(s.size())};
    for (int i = 0; i < n; ++i) {
        const int mi = mirror_index(center, i);
        if (mi < 0 || mi >= n) {
            out.even[i] = s[i];
            out.odd[i] = 0.0;
        } else {
            const double e = 0.5 * (s[i] + s[mi]);
            out.even[i] = e;
            out.odd[i] = detail::exact_complement(s[i], e);
        }
    }
    return out;
}

// 1D delta-approximation rate, the sigma_plus -> infinity reference.
struct DeltaEngine1D {
    std::vector<int> idx, midx;
    std::vector<double> k, w;
    double weight_sum = 0.0;

    explicit DeltaEngine1D(const BeamModel1D& m) {
        m.validate();
        const double s2 = 2.0 * m.sigma_minus * m.sigma_minus;
        for (int i = 0; i < m.n; ++i) {
            const double d = i - m.center;
            if (std::abs(d) > m.beam_radius) continue;
            idx.push_back(i);
            midx.push_back(mirror_index(m.center, i));
            const double kk = d * m.pitch;
            k.push_back(kk);
            const double ww = std::exp(-s2 * kk * kk);
            w.push_back(ww);
            weight_sum += ww;
        }
    }

    double rate(const std::vector<double>& phase, double dx) const {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double arg = k[i] * dx + phase[idx[i]] + phase[midx[i]];
            re += w[i] * std::cos(arg);
            im += w[i] * std::sin(arg);
        }
        return (re * re + im * im) / (weight_sum * weight_sum);
    }
};

// Full finite-sigma_plus rate as a bilinear form z1^T W z2 over in-beam
// modes, with the coupling matrix W precomputed once per model.
struct FullEngine1D {
    std::vector<int> idx;
    std::vector<double> k;
    std::vector<double> W; // m x m, row-major
    double norm = 0.0;     // flat-phase on-axis amplitude

    explicit FullEngine1D(const BeamModel1D& m) {
        m.validate();
        for (int i = 0; i < m.n; ++i) {
            const double d = i - m.center;
            if (std::abs(d) > m.beam_radius) continue;
            idx.push_back(i);
            k.push_back(d * m.pitch);
        }
        const std::size_t n = idx.size();
        W.resize(n * n);
        const double hp = 0.5 * m.sigma_plus * m.sigma_plus;
        const double hm = 0.5 * m.sigma_minus * m.sigma_minus;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double sum = k[a] + k[b];
                const double dif = k[a] - k[b];
                W[a * n + b] = std::exp(-hp * sum * sum - hm * dif * dif);
            }
        norm = amplitude_flat();
    }

    double rate(const std::vector<double>& phase, double x1, double x2) const {
        const std::size_t n = idx.size();
        std::vector<std::complex<double>> z1(n), z2(n);
        for (std::size_t a = 0; a < n; ++a) {
            z1[a] = std::polar(1.0, phase[idx[a]] + k[a] * x1);
            z2[a] = std::polar(1.0, phase[idx[a]] + k[a] * x2);
        }
        std::complex<double> amp = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            std::complex<double> inner = 0.0;
            const double* row = &W[a * n];
            for (std::size_t b = 0; b < n; ++b) inner += row[b] * z2[b];
            amp += z1[a] * inner;
        }
        return std::norm(amp) / (norm * norm);
    }

private:
    double amplitude_flat() const {
        const std::size_t n = idx.size();
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            double inner = 0.0;
            const double* row = &W[a * n];
            for (std::size_t b = 0; b < n; ++b) inner += row[b];
            acc += inner;
        }
        return acc;
    }
};

inline double rate_full_1d(const BeamModel1D& m, const std::vector<double>& phase, double x1,
                           double x2) {
    if (phase.size() != static_cast<std::size_t>(m.n))
        throw ConfigError("rate_full_1d: phase length does not match grid");
    FullEngine1D e(m);
    return e.rate(phase, x1, x2);
}

// Relative single-photon rate at detector position x (flat phase): the
// position-space marginal of the double-Gaussian state has variance
// (sigma_plus^2 + sigma_minus^2)/2 per axis.
inline double singles_envelope(double x, double sigma_plus, double sigma_minus) {
    const double var = 0.5 * (sigma_plus * sigma_plus + sigma_minus * sigma_minus);
    return std::exp(-x * x / (2.0 * var));
}

// 2D quadruple-sum rate; O(n^4) in beam pixels, hence the hard grid cap.
inline double rate_full_2d(const TwinPhotonModel& m, const PhaseScreen& total_phase, Center x1,
                           Center x2) {
    m.validate();
    if (m.spec.n > kFull2dMaxN)
        throw CapError("rate_full_2d: grid n=" + std::to_string(m.spec.n) + " exceeds the 2D cap (" +
                       std::to_string(kFull2dMaxN) + "); use rate_delta or a smaller grid");
    if (!(total_phase.spec == m.spec))
        throw ConfigError("rate_full_2d: phase screen does not match model grid");

    struct Mode {
        double kx, ky, phi;
    };
    std::vector<Mode> modes;
    const double r2 = m.beam_radius * m.beam_radius;
    for (int y = 0; y < m.spec.n; ++y) {
        const double dy = y - m.beam_center.cy;
        for (int x = 0; x < m.spec.n; ++x) {
            const double dx = x - m.beam_center.cx;
            if (dx * dx + dy * dy > r2) continue;
            modes.push_back({dx * m.spec.pitch, dy * m.spec.pitch, total_phase.at(x, y)});
        }
    }
    const double hp = 0.5 * m.sigma_plus * m.sigma_plus;
    const double hm = 0.5 * m.sigma_minus * m.sigma_minus;
    auto amplitude = [&](Center p1, Center p2, bool flat) {
        std::complex<double> acc = 0.0;
        for (const auto& a : modes) {
            std::complex<double> inner = 0.0;
            for (const auto& b : modes) {
                const double sx = a.kx + b.kx, sy = a.ky + b.ky;
                const double dxk = a.kx - b.kx, dyk = a.ky - b.ky;
                const double w = std::exp(-hp * (sx * sx + sy * sy) - hm * (dxk * dxk + dyk * dyk));
                const double ph = flat ? b.kx * p2.cx + b.ky * p2.cy
                                       : b.phi + b.kx * p2.cx + b.ky * p2.cy;
                inner += w * std::polar(1.0, ph);
            }
            const double ph = flat ? a.kx * p1.cx + a.ky * p1.cy
                                   : a.phi + a.kx * p1.cx + a.ky * p1.cy;
            acc += std::polar(1.0, ph) * inner;
        }
        return acc;
    };
    const std::complex<double> amp = amplitude(x1, x2, false);
    const std::complex<double> ref = amplitude(Center{0.0, 0.0}, Center{0.0, 0.0}, true);
    return std::norm(amp) / std::norm(ref);
}

} // namespace twincorr

#endif
