#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "twincorr/rng.hpp"

using namespace twincorr;

TEST_CASE("stream keys separate by any id") {
    const auto a = derive_stream(42, {1, 2, 3});
    const auto b = derive_stream(42, {1, 2, 4});
    const auto c = derive_stream(43, {1, 2, 3});
    REQUIRE(a != b);
    REQUIRE(a != c);
    REQUIRE(derive_stream(42, {1, 2, 3}) == a);
}

TEST_CASE("uniform draws replay exactly") {
    RngStream r1(derive_stream(7, {purpose::kFitness, 0, 1}));
    RngStream r2(derive_stream(7, {purpose::kFitness, 0, 1}));
    for (int i = 0; i < 100; ++i) REQUIRE(r1.next_u64() == r2.next_u64());
}

TEST_CASE("unit uniforms have sane mean and range") {
    RngStream r(99);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE(std::abs(sum / 100000 - 0.5) < 0.005);
}

TEST_CASE("normal draws match N(0,1) moments") {
    RngStream r(1234);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("poisson sampler moments across regimes") {
    for (double lam : {0.5, 3.0, 30.0, 3000.0}) {
        RngStream r(derive_stream(5, {static_cast<std::uint64_t>(lam * 10)}));
        const int n = 100000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(r.poisson(lam));
            s += x;
            s2 += x * x;
        }
        const double mean = s / n;
        const double var = s2 / n - mean * mean;
        const double se = std::sqrt(lam / n);
        REQUIRE(std::abs(mean - lam) < 6.0 * se);
        REQUIRE(std::abs(var - lam) < 0.05 * lam + 6.0 * se);
    }
}

TEST_CASE("poisson edge cases") {
    RngStream r(11);
    REQUIRE(r.poisson(0.0) == 0);
    REQUIRE_THROWS_AS(r.poisson(-1.0), std::domain_error);
    // huge mean stays within 5 sigma
    const double lam = 1e6;
    const double x = static_cast<double>(r.poisson(lam));
    REQUIRE(std::abs(x - lam) < 5.0 * std::sqrt(lam));
}
