#ifndef TWINCORR_GRID_HPP
#define TWINCORR_GRID_HPP

// Square-grid phase-screen algebra.
//
// Conventions used throughout:
//   - pixel centers sit at integer coordinates (0..n-1) per axis,
//   - screens are stored row-major, index = y*n + x,
//   - momentum of pixel i is k = (i - n/2) * pitch on the grid axis,
//   - reflection about a (possibly fractional) center c rounds to the
//     nearest pixel with ties toward the lower index.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "twincorr/errors.hpp"

namespace twincorr {

struct GridSpec {
    int n = 0;          // pixels per side, even, >= 8
    double pitch = 1.0; // momentum step per pixel

    void validate() const {
        if (n < 8 || n % 2 != 0)
            throw ConfigError("GridSpec: n must be even and >= 8, got " + std::to_string(n));
        if (!(pitch > 0.0))
            throw ConfigError("GridSpec: pitch must be > 0");
    }
    bool operator==(const GridSpec&) const = default;
};

struct Center {
    double cx = 0.0;
    double cy = 0.0;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Nearest integer, ties toward the lower value: 3.5 -> 3, -0.5 -> -1.
inline int round_half_down(double v) {
    return static_cast<int>(std::ceil(v - 0.5));
}

// Pixel index of the reflection of i about center coordinate c.
inline int mirror_index(double c, int i) {
    return round_half_down(2.0 * c - static_cast<double>(i));
}

// Geometric midpoint of the pixel array. Half-integer for even n, so the
// reflection i -> n-1-i is an exact involution with every mirror on-grid,
// and 8x8 superpixel blocks map onto whole blocks.
inline double grid_midpoint(int n) { return 0.5 * (n - 1); }

struct PhaseScreen {
    GridSpec spec;
    std::vector<double> v; // radians, unwrapped

    PhaseScreen() = default;
    PhaseScreen(GridSpec s, double fill) : spec(s), v(static_cast<std::size_t>(s.n) * s.n, fill) {}

    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * spec.n + x]; }
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * spec.n + x]; }
    int n() const { return spec.n; }

    PhaseScreen& operator+=(const PhaseScreen& o) {
        if (!(spec == o.spec)) throw ConfigError("PhaseScreen: adding screens with different GridSpec");
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    friend PhaseScreen operator+(PhaseScreen a, const PhaseScreen& b) { return a += b; }
};

inline PhaseScreen make_screen(GridSpec spec, double fill) {
    spec.validate();
    return PhaseScreen(spec, fill);
}

inline bool center_inside(const GridSpec& spec, const Center& c) {
    return c.cx >= 0.0 && c.cx <= spec.n - 1 && c.cy >= 0.0 && c.cy <= spec.n - 1 &&
           std::isfinite(c.cx) && std::isfinite(c.cy);
}

struct ParityParts {
    PhaseScreen even;
    PhaseScreen odd;
};

namespace detail {

// Residual d with even + d reconstructing a bit-exactly under one rounded
// addition; starts from fl(a - even) and nudges by ulps if the first
// rounding lands a neighbor.
inline double exact_complement(double a, double even) {
    double d = a - even;
    if (even + d == a) return d;
    for (int step = 0; step < 2; ++step) {
        const double up = std::nextafter(d, std::numeric_limits<double>::infinity());
        if (even + up == a) return up;
        const double dn = std::nextafter(d, -std::numeric_limits<double>::infinity());
        if (even + dn == a) return dn;
        d = (std::abs(even + up - a) < std::abs(even + dn - a)) ? up : dn;
    }
    return d;
}

} // namespace detail

// Point-inversion split about c. even(p) = (s(p)+s(mirror p))/2 and
// odd(p) = s(p) - even(p), so even+odd reconstructs s and the even part is
// exactly mirror-symmetric. Pixels whose mirror rounds off-grid keep
// even = s, odd = 0.
inline ParityParts parity_decompose(const PhaseScreen& s, const Center& c) {
    if (!center_inside(s.spec, c))
        throw std::domain_error("parity_decompose: center outside grid interior");
    const int n = s.spec.n;
    ParityParts out{PhaseScreen(s.spec, 0.0), PhaseScreen(s.spec, 0.0)};
    for (int y = 0; y < n; ++y) {
        const int my = mirror_index(c.cy, y);
        for (int x = 0; x < n; ++x) {
            const int mx = mirror_index(c.cx, x);
            const double a = s.at(x, y);
            if (mx < 0 || mx >= n || my < 0 || my >= n) {
                out.even.at(x, y) = a;
                out.odd.at(x, y) = 0.0;
            } else {
                const double e = 0.5 * (a + s.at(mx, my));
                out.even.at(x, y) = e;
                out.odd.at(x, y) = detail::exact_complement(a, e);
            }
        }
    }
    return out;
}

enum class ZernikeKind { ComaX, ComaY };

// Coma phase value at a continuous point (x, y): inside the disk rho <= 1,
// amplitude * (3 rho^3 - 2 rho) * cos/sin(theta) about c; zero outside.
// Odd under point inversion about c by construction.
inline double zernike_phase_at(ZernikeKind kind, double r, const Center& c, double amplitude,
                               double x, double y) {
    const double ux = x - c.cx;
    const double uy = y - c.cy;
    const double d2 = ux * ux + uy * uy;
    if (d2 > r * r || d2 == 0.0) return 0.0;
    const double d = std::sqrt(d2);
    const double rho = d / r;
    const double radial = amplitude * (3.0 * rho * rho * rho - 2.0 * rho);
    const double dir = (kind == ZernikeKind::ComaX) ? ux / d : uy / d;
    return radial * dir;
}

inline PhaseScreen zernike_screen(GridSpec spec, ZernikeKind kind, double r, const Center& c,
                                  double amplitude) {
    spec.validate();
    if (!(r > 0.0)) throw std::domain_error("zernike_screen: radius must be > 0");
    PhaseScreen out(spec, 0.0);
    for (int y = 0; y < spec.n; ++y)
        for (int x = 0; x < spec.n; ++x)
            out.at(x, y) = zernike_phase_at(kind, r, c, amplitude, x, y);
    return out;
}

} // namespace twincorr

#endif
