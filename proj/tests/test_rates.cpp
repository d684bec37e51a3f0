#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "twincorr/rates.hpp"

using namespace twincorr;

namespace {

TwinPhotonModel default_model(int n = 96, double radius = 40.0) {
    TwinPhotonModel m;
    m.spec = {n, 1.0};
    m.beam_center = {grid_midpoint(n), grid_midpoint(n)};
    m.beam_radius = radius;
    m.sigma_minus = 0.025;
    m.sigma_plus = 69.0 * 0.025;
    return m;
}

PhaseScreen random_screen(GridSpec spec, std::uint64_t seed, double scale = 3.0) {
    PhaseScreen s(spec, 0.0);
    RngStream rng(derive_stream(seed, {purpose::kScreen}));
    for (double& v : s.v) v = scale * (2.0 * rng.unit() - 1.0);
    return s;
}

// Antisymmetrized random screen: odd about c with exact negation.
PhaseScreen random_odd_screen(GridSpec spec, const Center& c, std::uint64_t seed) {
    auto g = random_screen(spec, seed, 1.5);
    PhaseScreen s(spec, 0.0);
    for (int y = 0; y < spec.n; ++y)
        for (int x = 0; x < spec.n; ++x) {
            const int mx = mirror_index(c.cx, x), my = mirror_index(c.cy, y);
            if (mx < 0 || mx >= spec.n || my < 0 || my >= spec.n)
                s.at(x, y) = 0.0;
            else
                s.at(x, y) = g.at(x, y) - g.at(mx, my);
        }
    return s;
}

// Independent reference: expand |sum|^2 into the explicit double loop over
// pixel pairs, never forming the complex amplitude.
double rate_delta_bruteforce(const TwinPhotonModel& m, const PhaseScreen& phase, Vec2 dx) {
    struct Term {
        double theta, w;
    };
    std::vector<Term> terms;
    const int n = m.spec.n;
    const double r2 = m.beam_radius * m.beam_radius;
    const double s2 = 2.0 * m.sigma_minus * m.sigma_minus;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double ddx = x - m.beam_center.cx, ddy = y - m.beam_center.cy;
            if (ddx * ddx + ddy * ddy > r2) continue;
            const int mx = mirror_index(m.beam_center.cx, x);
            const int my = mirror_index(m.beam_center.cy, y);
            const double kx = ddx * m.spec.pitch, ky = ddy * m.spec.pitch;
            terms.push_back({kx * dx.x + ky * dx.y + phase.at(x, y) + phase.at(mx, my),
                             std::exp(-s2 * (kx * kx + ky * ky))});
        }
    double acc = 0.0, wsum = 0.0;
    for (const auto& a : terms) {
        wsum += a.w;
        for (const auto& b : terms) acc += a.w * b.w * std::cos(a.theta - b.theta);
    }
    return acc / (wsum * wsum);
}

} // namespace

TEST_CASE("flat phase at dx=0 is exactly one") {
    auto m = default_model();
    auto flat = make_screen(m.spec, 0.0);
    REQUIRE(rate_delta(m, flat, {0.0, 0.0}) == 1.0);
    REQUIRE(rate_klyshko(m, flat, {0.0, 0.0}) == 1.0);
}

TEST_CASE("pure odd screens do not change the rate") {
    auto m = default_model();
    auto odd = random_odd_screen(m.spec, m.beam_center, 31);
    REQUIRE(std::abs(rate_delta(m, odd, {0.0, 0.0}) - 1.0) < 1e-10);

    // on top of a diffuser-like screen, at several dx
    auto s = random_screen(m.spec, 32);
    auto total = s + odd;
    for (auto dx : {Vec2{0.0, 0.0}, Vec2{0.07, -0.03}, Vec2{0.2, 0.11}}) {
        const double a = rate_delta(m, s, dx);
        const double b = rate_delta(m, total, dx);
        REQUIRE(std::abs(a - b) <= 1e-10 * std::max(1.0, a));
    }
}

TEST_CASE("rates stay within [0, 1 + eps]") {
    auto m = default_model();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = random_screen(m.spec, 100 + seed);
        const double r = rate_delta(m, s, {0.02 * seed, -0.01 * seed});
        REQUIRE(r >= 0.0);
        REQUIRE(r <= 1.0 + 1e-12);
    }
}

TEST_CASE("brute-force double-loop oracle on a 32x32 grid") {
    auto m = default_model(32, 12.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto s = random_screen(m.spec, 200 + seed, 2.0);
        const Vec2 dx{0.05 * static_cast<double>(seed), 0.02};
        const double fast = rate_delta(m, s, dx);
        const double slow = rate_delta_bruteforce(m, s, dx);
        REQUIRE(fast == Catch::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("klyshko path equals the direct rate") {
    auto m = default_model();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = random_screen(m.spec, 300 + seed);
        const Vec2 dx{0.03 * static_cast<double>(seed % 4), -0.015 * static_cast<double>(seed % 3)};
        const double a = rate_delta(m, s, dx);
        const double b = rate_klyshko(m, s, dx);
        REQUIRE(std::abs(a - b) <= 1e-9 * std::max(a, 1e-30));
    }
    // fractional beam center as well
    auto mf = default_model();
    mf.beam_center = {47.1, 47.9};
    auto s = random_screen(mf.spec, 999);
    const double a = rate_delta(mf, s, {0.1, 0.05});
    const double b = rate_klyshko(mf, s, {0.1, 0.05});
    REQUIRE(std::abs(a - b) <= 1e-9 * std::max(a, 1e-30));
}

TEST_CASE("adding a coma screen to a diffuser leaves the klyshko rate unchanged") {
    auto m = default_model();
    DiffuserSpec d{7, 32.0, 2.5};
    auto diff = make_diffuser(m, d);
    auto coma = zernike_screen(m.spec, ZernikeKind::ComaX, m.beam_radius, m.beam_center, 6.0);
    const double alone = rate_klyshko(m, diff, {0.0, 0.0});
    const double with_coma = rate_klyshko(m, diff + coma, {0.0, 0.0});
    REQUIRE(std::abs(alone - with_coma) <= 1e-10 * std::max(alone, 1e-30));
}

TEST_CASE("conjugating the even part restores the undisturbed rate") {
    auto m = default_model();
    DiffuserSpec d{7, 32.0, 2.5};
    auto diff = make_diffuser(m, d);
    const double scrambled = rate_delta(m, diff, {0.0, 0.0});
    REQUIRE(scrambled < 0.5);

    auto parts = parity_decompose(diff, m.beam_center);
    PhaseScreen conj = parts.even;
    for (double& v : conj.v) v = -v;
    const double restored = rate_delta(m, diff + conj, {0.0, 0.0});
    REQUIRE(std::abs(restored - 1.0) < 1e-6);

    // no random screen beats the conjugate
    BeamGeometry geom(m);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        RngStream rng(derive_stream(4242, {seed}));
        const double r = rate_delta_fn(
            geom,
            [&](int x, int y) {
                return diff.at(x, y) +
                       2.0 * std::numbers::pi *
                           RngStream(derive_stream(seed, {static_cast<std::uint64_t>(y) * 96u + x}))
                               .unit();
            },
            {0.0, 0.0});
        REQUIRE(r <= restored);
    }
}

TEST_CASE("delta rate table matches pointwise evaluation") {
    auto m = default_model();
    auto s = random_screen(m.spec, 55);
    BeamGeometry g(m);
    const int half = 4;
    const double dpitch = 0.05;
    auto table = delta_rate_table(g, s, half, dpitch);
    for (int dy = -half; dy <= half; dy += 2)
        for (int dx = -half; dx <= half; dx += 2) {
            const double direct = rate_delta(m, s, {dx * dpitch, dy * dpitch});
            const double tab = table[static_cast<std::size_t>(dy + half) * (2 * half + 1) + dx + half];
            REQUIRE(tab == Catch::Approx(direct).margin(1e-12));
        }
}

TEST_CASE("sample_counts behavior") {
    DetectionModel det;
    const auto key = derive_stream(1, {purpose::kFitness});
    REQUIRE(sample_counts(0.0, det, 1.0, key) == 0);
    REQUIRE_THROWS_AS(sample_counts(-0.1, det, 1.0, key), std::domain_error);
    REQUIRE(sample_counts(1.0, det, 1.0, key) == sample_counts(1.0, det, 1.0, key));

    // empirical mean of rate*kappa*window
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        sum += static_cast<double>(
            sample_counts(1.0, det, 1.0, derive_stream(2, {static_cast<std::uint64_t>(i)})));
    REQUIRE(sum / n == Catch::Approx(50.0).epsilon(0.01));
}
