#ifndef TWINCORR_CENTERLOCATE_HPP
#define TWINCORR_CENTERLOCATE_HPP

// Hierarchical odd-Zernike scan that locates the beam center on the SLM.
// A coma pattern placed exactly on the beam center is pure-odd and leaves
// the coincidence rate untouched, so the correlation quality (counts per
// integration window) peaks there. Stages refine coarse-to-fine; within a
// stage the x estimate comes from a ComaX line scan and the y estimate from
// a ComaY line scan at the updated x.

#include <cmath>
#include <cstdint>
#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "twincorr/grid.hpp"
#include "twincorr/rates.hpp"

namespace twincorr {

struct ScanStage {
    double r = 160.0;       // zernike radius, pixels
    int step = 64;          // lattice step, pixels
    double t_int = 1.0;     // seconds per point
    double half_span = 0.0; // region half-width around the running estimate; <= 0 means full frame
};

// Region half-spans keep every lattice point (corners included) inside the
// overlap zone: a trial center farther than r + beam_radius from the beam
// leaves the rate at its flat maximum, which would tie with or beat the
// true peak. Each span still covers the previous stage's half-step
// residual.
inline std::vector<ScanStage> default_scan_schedule() {
    return {{160.0, 64, 1.0, 85.0}, {80.0, 8, 1.0, 64.0}, {40.0, 1, 1.0, 8.0}, {20.0, 1, 5.0, 3.0}};
}

struct ScanScene {
    TwinPhotonModel model;
    const PhaseScreen* diffuser = nullptr; // normally absent for this procedure
    DetectionModel det;
    double amplitude = 6.0; // coma amplitude, radians
    bool exact_rates = false;
};

inline double correlation_quality_rate(ZernikeKind kind, double r, const Center& c,
                                       const ScanScene& scene, const BeamGeometry& geom) {
    if (!(r > 0.0)) throw std::domain_error("correlation_quality: zernike radius must be > 0");
    const PhaseScreen* diff = scene.diffuser;
    return rate_delta_fn(
        geom,
        [&](int x, int y) {
            const double z = zernike_phase_at(kind, r, c, scene.amplitude, x, y);
            return diff ? diff->at(x, y) + z : z;
        },
        {scene.det.x1.cx - scene.det.x2.cx, scene.det.x1.cy - scene.det.x2.cy});
}

// Counts over one integration window; exact-rate scenes return the expected
// value instead of a Poisson draw.
inline double correlation_quality(ZernikeKind kind, double r, const Center& c,
                                  const ScanScene& scene, double t_int, std::uint64_t stream_key,
                                  const BeamGeometry& geom) {
    const double rate = correlation_quality_rate(kind, r, c, scene, geom);
    if (scene.exact_rates) return rate * scene.det.kappa * t_int;
    return static_cast<double>(sample_counts(rate, scene.det, t_int, stream_key));
}

struct QualityMap {
    ZernikeKind kind = ZernikeKind::ComaX;
    double r = 0.0;
    std::vector<double> xs, ys; // scanned lattice (either may be a single point)
    std::vector<double> q;      // row-major over (y, x)
    Center argmax{};
    bool flat = false;
    bool boundary_argmax = false;
};

// Evaluates the quality on the step lattice over [x0,x1] x [y0,y1].
// Tie-break: the first point in (y, x) scan order, i.e. lowest (cy, cx).
inline QualityMap scan_stage(ZernikeKind kind, double r, int step, double t_int, double x0,
                             double x1, double y0, double y1, const ScanScene& scene,
                             std::uint64_t stream_key) {
    if (step < 1) throw ConfigError("scan_stage: step must be >= 1");
    QualityMap map;
    map.kind = kind;
    map.r = r;
    for (double x = x0; x <= x1 + 1e-9; x += step) map.xs.push_back(x);
    for (double y = y0; y <= y1 + 1e-9; y += step) map.ys.push_back(y);
    if (map.xs.empty() || map.ys.empty()) throw ConfigError("scan_stage: empty region");
    BeamGeometry geom(scene.model);
    map.q.resize(map.xs.size() * map.ys.size());
    std::size_t best = 0;
    for (std::size_t iy = 0; iy < map.ys.size(); ++iy)
        for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
            const std::size_t idx = iy * map.xs.size() + ix;
            const Center c{map.xs[ix], map.ys[iy]};
            map.q[idx] = correlation_quality(
                kind, r, c, scene, t_int,
                derive_stream(stream_key, {purpose::kScan, static_cast<std::uint64_t>(idx)}), geom);
            if (map.q[idx] > map.q[best]) best = idx;
        }
    const std::size_t bx = best % map.xs.size();
    const std::size_t by = best / map.xs.size();
    map.argmax = {map.xs[bx], map.ys[by]};
    map.flat = true;
    for (double v : map.q)
        if (v != map.q[0]) {
            map.flat = false;
            break;
        }
    map.boundary_argmax = (map.xs.size() > 1 && (bx == 0 || bx + 1 == map.xs.size())) ||
                          (map.ys.size() > 1 && (by == 0 || by + 1 == map.ys.size()));
    return map;
}

struct LocateResult {
    Center center{};
    std::vector<QualityMap> maps; // two per stage: ComaX then ComaY
    std::vector<std::string> warnings;
};

// Runs the schedule. Each stage scans the full (cx, cy) lattice for ComaX
// and reads off the x estimate, then for ComaY and reads off y, regions
// centered on the running estimate. Scanning both coordinates per kind
// keeps the peak contrast high even while the other axis is still coarse;
// axis-line scans stall on the rim-scramble ripple once the fixed axis is
// off by more than a few pixels.
//
// A non-flat argmax on the read-off axis edge of a refinement stage
// (stage 2 on) aborts with BoundaryError so the caller can widen and
// retry; on the first stage it only warns, since that region is the
// caller's rough prior window and the next stage covers a full coarse
// step. Widened spans are capped so every lattice point keeps the coma
// disk overlapping the beam; past r + beam_radius the quality returns to
// its flat maximum and larger regions only manufacture boundary ties.
inline LocateResult locate_center(const std::vector<ScanStage>& schedule, const ScanScene& scene,
                                  std::uint64_t stream_key,
                                  std::optional<Center> initial = std::nullopt,
                                  double widen_factor = 1.0) {
    if (schedule.empty()) throw ConfigError("locate_center: empty schedule");
    const int n = scene.model.spec.n;
    LocateResult out;
    Center est = initial.value_or(Center{grid_midpoint(n), grid_midpoint(n)});
    for (std::size_t si = 0; si < schedule.size(); ++si) {
        const auto& st = schedule[si];
        double span = st.half_span > 0.0 ? st.half_span * widen_factor : static_cast<double>(n);
        if (widen_factor > 1.0 && st.half_span > 0.0) {
            const double cap = (st.r + scene.model.beam_radius - 40.0) / std::numbers::sqrt2;
            span = std::min(span, std::max(st.half_span, cap));
        }
        auto region = [&](const Center& c) {
            return std::array<double, 4>{std::max(0.0, std::floor(c.cx - span)),
                                         std::min(static_cast<double>(n - 1), std::ceil(c.cx + span)),
                                         std::max(0.0, std::floor(c.cy - span)),
                                         std::min(static_cast<double>(n - 1), std::ceil(c.cy + span))};
        };

        auto rx = region(est);
        auto mx = scan_stage(ZernikeKind::ComaX, st.r, st.step, st.t_int, rx[0], rx[1], rx[2],
                             rx[3], scene, derive_stream(stream_key, {2 * si}));
        const bool x_on_edge =
            mx.xs.size() > 1 && (mx.argmax.cx == mx.xs.front() || mx.argmax.cx == mx.xs.back());
        if (mx.flat) {
            out.warnings.push_back("stage " + std::to_string(si + 1) +
                                   " ComaX scan is flat; keeping tie-break point");
        } else if (x_on_edge) {
            if (si == 0)
                out.warnings.push_back("stage 1 ComaX argmax on region edge");
            else
                throw BoundaryError("locate_center: stage " + std::to_string(si + 1) +
                                    " ComaX argmax on region edge");
        }
        est.cx = mx.argmax.cx;
        out.maps.push_back(std::move(mx));

        auto ry = region(est);
        auto my = scan_stage(ZernikeKind::ComaY, st.r, st.step, st.t_int, ry[0], ry[1], ry[2],
                             ry[3], scene, derive_stream(stream_key, {2 * si + 1}));
        const bool y_on_edge =
            my.ys.size() > 1 && (my.argmax.cy == my.ys.front() || my.argmax.cy == my.ys.back());
        if (my.flat) {
            out.warnings.push_back("stage " + std::to_string(si + 1) +
                                   " ComaY scan is flat; keeping tie-break point");
        } else if (y_on_edge) {
            if (si == 0)
                out.warnings.push_back("stage 1 ComaY argmax on region edge");
            else
                throw BoundaryError("locate_center: stage " + std::to_string(si + 1) +
                                    " ComaY argmax on region edge");
        }
        est.cy = my.argmax.cy;
        out.maps.push_back(std::move(my));
    }
    out.center = est;
    return out;
}

// Retry wrapper: widen every stage region once after a boundary abort.
inline LocateResult locate_center_with_retry(const std::vector<ScanStage>& schedule,
                                             const ScanScene& scene, std::uint64_t stream_key,
                                             std::optional<Center> initial = std::nullopt) {
    try {
        return locate_center(schedule, scene, stream_key, initial, 1.0);
    } catch (const BoundaryError&) {
        auto out = locate_center(schedule, scene, derive_stream(stream_key, {purpose::kScan, 2}),
                                 initial, 2.0);
        out.warnings.push_back("region widened once after a boundary argmax");
        return out;
    }
}

} // namespace twincorr

#endif
