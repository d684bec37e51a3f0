#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "twincorr/grid.hpp"
#include "twincorr/rng.hpp"

using namespace twincorr;

namespace {

PhaseScreen random_screen(GridSpec spec, std::uint64_t seed, double scale = 3.0) {
    PhaseScreen s(spec, 0.0);
    RngStream rng(derive_stream(seed, {purpose::kScreen}));
    for (double& v : s.v) v = scale * (2.0 * rng.unit() - 1.0);
    return s;
}

} // namespace

TEST_CASE("make_screen basics") {
    auto s = make_screen({64, 1.0}, 0.0);
    REQUIRE(s.n() == 64);
    for (double v : s.v) REQUIRE(v == 0.0);

    auto t = make_screen({8, 0.5}, std::numbers::pi);
    for (double v : t.v) REQUIRE(v == std::numbers::pi);

    REQUIRE_THROWS_AS(make_screen({7, 1.0}, 0.0), ConfigError);
    REQUIRE_THROWS_AS(make_screen({64, 0.0}, 0.0), ConfigError);
    REQUIRE_THROWS_AS(make_screen({4, 1.0}, 0.0), ConfigError);
}

TEST_CASE("round_half_down ties go to the lower index") {
    REQUIRE(round_half_down(3.5) == 3);
    REQUIRE(round_half_down(3.51) == 4);
    REQUIRE(round_half_down(3.49) == 3);
    REQUIRE(round_half_down(-0.5) == -1);
    REQUIRE(round_half_down(0.0) == 0);
}

TEST_CASE("parity of a symmetric screen has zero odd part") {
    GridSpec spec{16, 1.0};
    Center c{8.0, 8.0};
    PhaseScreen s(spec, 0.0);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double dx = x - c.cx, dy = y - c.cy;
            s.at(x, y) = dx * dx + dy * dy; // even about c
        }
    auto parts = parity_decompose(s, c);
    for (double v : parts.odd.v) REQUIRE(v == 0.0);
}

TEST_CASE("parity of a linear ramp through the center is all odd") {
    GridSpec spec{16, 1.0};
    Center c{8.0, 8.0};
    PhaseScreen s(spec, 0.0);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) s.at(x, y) = 0.3 * (x - c.cx) + 0.7 * (y - c.cy);
    auto parts = parity_decompose(s, c);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const int mx = mirror_index(c.cx, x), my = mirror_index(c.cy, y);
            if (mx < 0 || mx >= 16 || my < 0 || my >= 16) continue;
            REQUIRE(parts.even.at(x, y) == 0.0);
        }
}

TEST_CASE("parity completeness and even symmetry, midpoint center") {
    GridSpec spec{32, 1.0};
    Center c{grid_midpoint(32), grid_midpoint(32)};
    // cliff-free values (one binade apart at most) make the complement
    // representable, so reconstruction is bit-exact at every pixel
    PhaseScreen s(spec, 0.0);
    RngStream rng(derive_stream(2024, {purpose::kScreen}));
    for (double& v : s.v) v = 2.0 + 3.0 * rng.unit();
    auto parts = parity_decompose(s, c);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            REQUIRE(parts.even.at(x, y) + parts.odd.at(x, y) == s.at(x, y));
            const int mx = mirror_index(c.cx, x), my = mirror_index(c.cy, y);
            REQUIRE(parts.even.at(x, y) == parts.even.at(mx, my));
        }
}

TEST_CASE("parity reconstruction is within one ulp for arbitrary screens") {
    GridSpec spec{32, 1.0};
    Center c{grid_midpoint(32), grid_midpoint(32)};
    auto s = random_screen(spec, 2024);
    auto parts = parity_decompose(s, c);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const double r = parts.even.at(x, y) + parts.odd.at(x, y);
            const double a = s.at(x, y);
            REQUIRE(std::abs(r - a) <=
                    std::max(std::abs(parts.even.at(x, y)), std::abs(a)) * 2.3e-16);
        }
}

TEST_CASE("parity idempotence: decomposing the even part leaves no odd part") {
    GridSpec spec{32, 1.0};
    Center c{16.0, 16.0};
    auto s = random_screen(spec, 77);
    auto parts = parity_decompose(s, c);
    auto again = parity_decompose(parts.even, c);
    for (double v : again.odd.v) REQUIRE(v == 0.0);
}

TEST_CASE("parity edge rule and center validation") {
    GridSpec spec{16, 1.0};
    auto s = random_screen(spec, 5);
    // center near the corner: many mirrors land off-grid
    Center c{1.0, 1.0};
    auto parts = parity_decompose(s, c);
    // pixel (15, 15) mirrors to (-13, -13): carries even = s, odd = 0
    REQUIRE(parts.even.at(15, 15) == s.at(15, 15));
    REQUIRE(parts.odd.at(15, 15) == 0.0);

    REQUIRE_THROWS_AS(parity_decompose(s, Center{-2.0, 8.0}), std::domain_error);
    REQUIRE_THROWS_AS(parity_decompose(s, Center{8.0, 16.0}), std::domain_error);
}

TEST_CASE("zernike values at the center and rim") {
    Center c{24.0, 24.0};
    const double amp = 6.0;
    REQUIRE(zernike_phase_at(ZernikeKind::ComaX, 10.0, c, amp, c.cx, c.cy) == 0.0);
    // rho = 1, theta = 0: amplitude * (3 - 2) * 1
    REQUIRE(zernike_phase_at(ZernikeKind::ComaX, 10.0, c, amp, c.cx + 10.0, c.cy) ==
            Catch::Approx(amp).margin(1e-12));
    // just outside the disk
    REQUIRE(zernike_phase_at(ZernikeKind::ComaX, 10.0, c, amp, c.cx + 10.5, c.cy) == 0.0);
    // ComaY at rho=1 along +y
    REQUIRE(zernike_phase_at(ZernikeKind::ComaY, 10.0, c, amp, c.cx, c.cy + 10.0) ==
            Catch::Approx(amp).margin(1e-12));
    REQUIRE_THROWS_AS(zernike_screen({16, 1.0}, ZernikeKind::ComaX, 0.0, c, amp), std::domain_error);
}

TEST_CASE("zernike screens are odd about an integer center") {
    GridSpec spec{48, 1.0};
    Center c{24.0, 24.0};
    for (auto kind : {ZernikeKind::ComaX, ZernikeKind::ComaY}) {
        auto z = zernike_screen(spec, kind, 15.0, c, 6.0);
        auto parts = parity_decompose(z, c);
        double max_even = 0.0;
        for (double v : parts.even.v) max_even = std::max(max_even, std::abs(v));
        REQUIRE(max_even < 1e-12);
        // direct antisymmetry check, skipping a 2 px band at the rim
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x) {
                const double d = std::hypot(x - c.cx, y - c.cy);
                if (d > 13.0) continue;
                const int mx = mirror_index(c.cx, x), my = mirror_index(c.cy, y);
                REQUIRE(std::abs(z.at(x, y) + z.at(mx, my)) < 1e-12);
            }
    }
}

TEST_CASE("zernike oddness with a fractional center, rim band excluded") {
    GridSpec spec{48, 1.0};
    Center c{24.3, 23.6};
    const double r = 15.0;
    auto z = zernike_screen(spec, ZernikeKind::ComaX, r, c, 6.0);
    double worst = 0.0;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            const double d = std::hypot(x - c.cx, y - c.cy);
            if (d > r - 2.0) continue; // rounding band at the rim
            const int mx = mirror_index(c.cx, x), my = mirror_index(c.cy, y);
            worst = std::max(worst, std::abs(z.at(x, y) + z.at(mx, my)));
        }
    // fractional centers round the mirror pixel; the residual is bounded by
    // the gradient times one pixel
    REQUIRE(worst < 2.0);
    REQUIRE(worst > 0.0);
}

TEST_CASE("screen addition requires matching specs") {
    auto a = make_screen({16, 1.0}, 1.0);
    auto b = make_screen({16, 1.0}, 2.0);
    auto c = a + b;
    REQUIRE(c.at(3, 3) == 3.0);
    auto d = make_screen({16, 0.5}, 2.0);
    REQUIRE_THROWS_AS(a + d, ConfigError);
}
