#ifndef TWINCORR_EMCCD_HPP
#define TWINCORR_EMCCD_HPP

// Thresholded-frame coincidence imaging. Pairs are drawn from the ideal
// difference-coordinate distribution, routed through a beamsplitter onto
// two binary detector channels, and correlated across frames with
// background subtraction:
//   Gamma(p,q) = <A(p)B(q)> - <A(p)><B(q)>,   C(d) = sum_p Gamma(p, p+d).

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "twincorr/model.hpp"
#include "twincorr/rates.hpp"
#include "twincorr/rng.hpp"

namespace twincorr {

struct CorrelationMap {
    int m = 0;           // odd; center bin is d = 0
    double window = 0.0; // extent per side, grid units
    std::vector<double> v;

    double at(int dx, int dy) const { // offsets in [-m/2, m/2]
        const int h = m / 2;
        return v[static_cast<std::size_t>(dy + h) * m + dx + h];
    }
};

// Detector pixel pitch: fine enough to resolve the correlation peak
// (sigma ~ 2 sigma_minus) over a few pixels, like the de-magnified crop in
// front of the camera.
inline double emccd_pixel_pitch(const TwinPhotonModel& model) {
    return 0.8 * model.sigma_minus;
}

// Pairs per frame that land the target photon density on the detector crop,
// from the Gaussian single-photon capture fraction of the crop.
inline double emccd_pairs_mean(const TwinPhotonModel& model, const EmccdSpec& e) {
    if (e.pairs_per_frame_mean > 0.0) return e.pairs_per_frame_mean;
    const double extent = e.detector_pixels * emccd_pixel_pitch(model);
    const double sig_x = std::sqrt(
        0.5 * (model.sigma_plus * model.sigma_plus + model.sigma_minus * model.sigma_minus));
    const double p_axis = std::erf(0.5 * extent / (sig_x * std::sqrt(2.0)));
    const double p_in = p_axis * p_axis; // one photon inside the square crop
    const double wanted_photons = e.mean_photons_per_pixel *
                                  static_cast<double>(e.detector_pixels) * e.detector_pixels;
    return wanted_photons / (2.0 * p_in);
}

namespace detail {

// Walker alias table for O(1) discrete sampling; deterministic build.
struct AliasTable {
    std::vector<double> prob;
    std::vector<int> alias;

    explicit AliasTable(const std::vector<double>& weights) {
        const int n = static_cast<int>(weights.size());
        prob.assign(n, 0.0);
        alias.assign(n, 0);
        double total = 0.0;
        for (double w : weights) total += w;
        std::vector<double> scaled(n);
        for (int i = 0; i < n; ++i) scaled[i] = weights[i] * n / total;
        std::vector<int> small, large;
        for (int i = n - 1; i >= 0; --i)
            (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            const int s = small.back();
            const int l = large.back();
            small.pop_back();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (int i : large) prob[i] = 1.0;
        for (int i : small) prob[i] = 1.0;
    }

    int sample(RngStream& rng) const {
        const int n = static_cast<int>(prob.size());
        const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        return rng.unit() < prob[i] ? i : alias[i];
    }
};

struct FrameAccum {
    std::vector<std::int64_t> s_ab; // (2H+1)^2 coincidence histogram
    std::vector<std::uint32_t> a_sum, b_sum;

    FrameAccum(int map_m, int npx)
        : s_ab(static_cast<std::size_t>(map_m) * map_m, 0),
          a_sum(static_cast<std::size_t>(npx), 0),
          b_sum(static_cast<std::size_t>(npx), 0) {}

    void merge(const FrameAccum& o) {
        for (std::size_t i = 0; i < s_ab.size(); ++i) s_ab[i] += o.s_ab[i];
        for (std::size_t i = 0; i < a_sum.size(); ++i) a_sum[i] += o.a_sum[i];
        for (std::size_t i = 0; i < b_sum.size(); ++i) b_sum[i] += o.b_sum[i];
    }
};

} // namespace detail

inline CorrelationMap emccd_capture(const TwinPhotonModel& model, const PhaseScreen& total_phase,
                                    const EmccdSpec& spec, std::uint64_t stream_key,
                                    int map_halfwidth = 16, int threads = 0) {
    model.validate();
    spec.validate();
    const int P = spec.detector_pixels;
    const double pitch = emccd_pixel_pitch(model);
    const double extent = P * pitch;
    const int H = map_halfwidth;
    const int M = 2 * H + 1;

    // difference-coordinate distribution over the detector's reachable range
    const int dhalf = P - 1;
    const int dm = 2 * dhalf + 1;
    BeamGeometry geom(model);
    const auto table = delta_rate_table(geom, total_phase, dhalf, pitch);
    const detail::AliasTable sampler(table);

    const double pairs_mean = emccd_pairs_mean(model, spec);
    const double sum_sigma = 2.0 * model.sigma_plus; // x1 + x2 per axis

    const long n_frames = spec.n_frames;
    int nthreads = threads > 0 ? threads
                               : static_cast<int>(std::min(4u, std::thread::hardware_concurrency()));
    if (nthreads < 1) nthreads = 1;

    auto run_frames = [&](long f0, long f1, detail::FrameAccum& acc) {
        std::vector<std::uint8_t> a_fired(static_cast<std::size_t>(P) * P);
        std::vector<std::uint8_t> b_fired(static_cast<std::size_t>(P) * P);
        std::vector<int> a_list, b_list;
        a_list.reserve(512);
        b_list.reserve(512);
        for (long f = f0; f < f1; ++f) {
            RngStream rng(derive_stream(stream_key, {purpose::kFrame, static_cast<std::uint64_t>(f)}));
            std::fill(a_fired.begin(), a_fired.end(), 0);
            std::fill(b_fired.begin(), b_fired.end(), 0);
            a_list.clear();
            b_list.clear();
            const long long npairs = rng.poisson(pairs_mean);
            for (long long p = 0; p < npairs; ++p) {
                const int bin = sampler.sample(rng);
                const double ddx = (bin % dm - dhalf) * pitch;
                const double ddy = (bin / dm - dhalf) * pitch;
                const double sx = sum_sigma * rng.normal();
                const double sy = sum_sigma * rng.normal();
                const double x1 = 0.5 * (sx + ddx), y1 = 0.5 * (sy + ddy);
                const double x2 = 0.5 * (sx - ddx), y2 = 0.5 * (sy - ddy);
                const bool one_to_a = rng.unit() < 0.5;
                const bool two_to_a = rng.unit() < 0.5;
                auto deposit = [&](double x, double y, bool to_a) {
                    const int ix = static_cast<int>(std::floor((x + 0.5 * extent) / pitch));
                    const int iy = static_cast<int>(std::floor((y + 0.5 * extent) / pitch));
                    if (ix < 0 || ix >= P || iy < 0 || iy >= P) return;
                    const std::size_t idx = static_cast<std::size_t>(iy) * P + ix;
                    auto& fired = to_a ? a_fired : b_fired;
                    auto& list = to_a ? a_list : b_list;
                    if (!fired[idx]) {
                        fired[idx] = 1;
                        list.push_back(static_cast<int>(idx));
                    }
                };
                deposit(x1, y1, one_to_a);
                deposit(x2, y2, two_to_a);
            }
            for (int ia : a_list) ++acc.a_sum[ia];
            for (int ib : b_list) ++acc.b_sum[ib];
            for (int ia : a_list) {
                const int ax = ia % P, ay = ia / P;
                for (int ib : b_list) {
                    const int dx = ib % P - ax;
                    const int dy = ib / P - ay;
                    if (dx < -H || dx > H || dy < -H || dy > H) continue;
                    ++acc.s_ab[static_cast<std::size_t>(dy + H) * M + dx + H];
                }
            }
        }
    };

    std::vector<detail::FrameAccum> accs;
    accs.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) accs.emplace_back(M, P * P);
    if (nthreads == 1) {
        run_frames(0, n_frames, accs[0]);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_frames + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const long f0 = t * chunk;
            const long f1 = std::min<long>(n_frames, f0 + chunk);
            if (f0 >= f1) break;
            pool.emplace_back([&, f0, f1, t] { run_frames(f0, f1, accs[t]); });
        }
        for (auto& th : pool) th.join();
        for (int t = 1; t < nthreads; ++t) accs[0].merge(accs[t]);
    }
    const auto& acc = accs[0];

    CorrelationMap out;
    out.m = M;
    out.window = M * pitch;
    out.v.assign(static_cast<std::size_t>(M) * M, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n_frames);
    for (int dy = -H; dy <= H; ++dy)
        for (int dx = -H; dx <= H; ++dx) {
            double mean_prod = 0.0;
            for (int ay = 0; ay < P; ++ay) {
                const int by = ay + dy;
                if (by < 0 || by >= P) continue;
                for (int ax = 0; ax < P; ++ax) {
                    const int bx = ax + dx;
                    if (bx < 0 || bx >= P) continue;
                    mean_prod += acc.a_sum[static_cast<std::size_t>(ay) * P + ax] * inv_n *
                                 acc.b_sum[static_cast<std::size_t>(by) * P + bx] * inv_n;
                }
            }
            const double coinc =
                acc.s_ab[static_cast<std::size_t>(dy + H) * M + dx + H] * inv_n;
            out.v[static_cast<std::size_t>(dy + H) * M + dx + H] = coinc - mean_prod;
        }
    return out;
}

// Peak contrast (mu_peak - mu_bg) / sigma_bg with the peak a central square
// of side 2*halfwidth+1 and the background everything else.
inline double contrast(const CorrelationMap& map, int peak_halfwidth) {
    const int H = map.m / 2;
    if (peak_halfwidth < 0 || peak_halfwidth >= H)
        throw std::domain_error("contrast: peak window must sit strictly inside the map");
    double peak_sum = 0.0, bg_sum = 0.0;
    long peak_n = 0, bg_n = 0;
    for (int dy = -H; dy <= H; ++dy)
        for (int dx = -H; dx <= H; ++dx) {
            const double v = map.at(dx, dy);
            if (std::abs(dx) <= peak_halfwidth && std::abs(dy) <= peak_halfwidth) {
                peak_sum += v;
                ++peak_n;
            } else {
                bg_sum += v;
                ++bg_n;
            }
        }
    const double mu_bg = bg_sum / static_cast<double>(bg_n);
    double ss = 0.0;
    for (int dy = -H; dy <= H; ++dy)
        for (int dx = -H; dx <= H; ++dx) {
            if (std::abs(dx) <= peak_halfwidth && std::abs(dy) <= peak_halfwidth) continue;
            const double d = map.at(dx, dy) - mu_bg;
            ss += d * d;
        }
    const double sigma_bg = std::sqrt(ss / static_cast<double>(bg_n - 1));
    if (!(sigma_bg > 0.0)) throw std::domain_error("contrast: background deviation is zero");
    return (peak_sum / static_cast<double>(peak_n) - mu_bg) / sigma_bg;
}

// Difference-coordinate offset of the map maximum.
inline std::pair<int, int> map_peak_offset(const CorrelationMap& map) {
    const int H = map.m / 2;
    int bx = -H, by = -H;
    double best = map.at(-H, -H);
    for (int dy = -H; dy <= H; ++dy)
        for (int dx = -H; dx <= H; ++dx)
            if (map.at(dx, dy) > best) {
                best = map.at(dx, dy);
                bx = dx;
                by = dy;
            }
    return {bx, by};
}

} // namespace twincorr

#endif
