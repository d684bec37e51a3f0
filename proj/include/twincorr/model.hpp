#ifndef TWINCORR_MODEL_HPP
#define TWINCORR_MODEL_HPP

// Two-photon model parameters and the random diffuser generator.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "twincorr/errors.hpp"
#include "twincorr/grid.hpp"
#include "twincorr/rng.hpp"

namespace twincorr {

struct TwinPhotonModel {
    GridSpec spec;
    double sigma_plus = 1.725;  // inverse-momentum grid units
    double sigma_minus = 0.025;
    Center beam_center{};
    double beam_radius = 40.0; // pixels

    void validate() const {
        spec.validate();
        if (!(sigma_plus > sigma_minus && sigma_minus > 0.0))
            throw ConfigError("TwinPhotonModel: need sigma_plus > sigma_minus > 0");
        if (!(beam_radius > 0.0)) throw ConfigError("TwinPhotonModel: beam_radius must be > 0");
        // Mirrors of in-beam pixels must stay on the grid (1 px rounding margin).
        const double m = beam_radius + 1.0;
        if (beam_center.cx - m < 0.0 || beam_center.cx + m > spec.n - 1 ||
            beam_center.cy - m < 0.0 || beam_center.cy + m > spec.n - 1)
            throw ConfigError("TwinPhotonModel: beam disk (plus mirror margin) not contained in grid");
    }
};

struct DiffuserSpec {
    std::uint64_t seed = 1;
    double corr_len = 32.0;  // pixels, autocorrelation 1/e half-width of the screen
    double phase_std = 2.5;  // radians

    void validate() const {
        if (!(corr_len >= 1.0)) throw ConfigError("DiffuserSpec: corr_len must be >= 1 pixel");
        if (!(phase_std >= 0.0)) throw ConfigError("DiffuserSpec: phase_std must be >= 0");
    }
};

struct DetectionModel {
    Center x1{};          // detector-plane position, grid units
    Center x2{};
    double kappa = 50.0;  // coincidence counts per second at unit rate
    double t_int = 1.0;   // seconds per pattern
    double t_final = 50.0;

    void validate() const {
        if (!(kappa > 0.0)) throw ConfigError("DetectionModel: kappa must be > 0");
        if (!(t_int > 0.0)) throw ConfigError("DetectionModel: t_int must be > 0");
        if (!(t_final > 0.0)) throw ConfigError("DetectionModel: t_final must be > 0");
    }
};

struct EmccdSpec {
    long n_frames = 100000;
    double mean_photons_per_pixel = 0.1; // target density on the illuminated crop
    double pairs_per_frame_mean = 0.0;   // 0 -> derive from the density
    int detector_pixels = 64;

    void validate() const {
        if (n_frames < 1) throw ConfigError("EmccdSpec: n_frames must be >= 1");
        if (!(mean_photons_per_pixel > 0.0 && mean_photons_per_pixel < 1.0))
            throw ConfigError("EmccdSpec: mean_photons_per_pixel must be in (0,1)");
        if (detector_pixels < 8) throw ConfigError("EmccdSpec: detector_pixels must be >= 8");
        if (pairs_per_frame_mean < 0.0) throw ConfigError("EmccdSpec: pairs_per_frame_mean must be >= 0");
    }
};

// Closed-form Schmidt number of the double-Gaussian state, per transverse
// dimension K1 = (R + 1/R)/2 with R = sigma_plus/sigma_minus; in 2D K1^2.
inline double schmidt_number_2d(const TwinPhotonModel& m) {
    const double r = m.sigma_plus / m.sigma_minus;
    const double k1 = 0.5 * (r + 1.0 / r);
    return k1 * k1;
}

namespace detail {

// Separable circular convolution with a Gaussian kernel, 1/e half-width w.
inline void smooth_circular(std::vector<double>& v, int n, double w) {
    int half = static_cast<int>(std::ceil(3.5 * w));
    if (half > n / 2) half = n / 2;
    std::vector<double> kernel(2 * half + 1);
    for (int i = -half; i <= half; ++i)
        kernel[i + half] = std::exp(-(static_cast<double>(i) * i) / (w * w));
    std::vector<double> tmp(v.size());
    // rows
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i) {
                int xx = x + i;
                xx -= n * static_cast<int>(std::floor(static_cast<double>(xx) / n));
                acc += kernel[i + half] * v[static_cast<std::size_t>(y) * n + xx];
            }
            tmp[static_cast<std::size_t>(y) * n + x] = acc;
        }
    // columns
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i) {
                int yy = y + i;
                yy -= n * static_cast<int>(std::floor(static_cast<double>(yy) / n));
                acc += kernel[i + half] * tmp[static_cast<std::size_t>(yy) * n + x];
            }
            v[static_cast<std::size_t>(y) * n + x] = acc;
        }
}

inline void normalize_screen(std::vector<double>& v, double phase_std) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double& x : v) {
        x -= mean;
        var += x * x;
    }
    var /= static_cast<double>(v.size());
    const double sd = std::sqrt(var);
    const double scale = sd > 0.0 ? phase_std / sd : 0.0;
    for (double& x : v) x *= scale;
}

} // namespace detail

// Random phase screen: white Gaussian noise smoothed to the requested
// correlation length, mean-removed and rescaled to phase_std. The kernel
// width is corr_len/sqrt(2) so the generated screen's autocorrelation has
// 1/e half-width corr_len. Deterministic in the seed.
inline PhaseScreen make_diffuser(const TwinPhotonModel& model, const DiffuserSpec& d) {
    model.validate();
    d.validate();
    PhaseScreen out(model.spec, 0.0);
    if (d.phase_std == 0.0) return out;
    RngStream rng(derive_stream(d.seed, {purpose::kDiffuser}));
    for (double& x : out.v) x = rng.normal();
    detail::smooth_circular(out.v, model.spec.n, d.corr_len / std::sqrt(2.0));
    detail::normalize_screen(out.v, d.phase_std);
    return out;
}

} // namespace twincorr

#endif
