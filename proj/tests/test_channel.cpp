#include "isac/channel.hpp"
#include "isac/random.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

using namespace isac;

TEST_CASE("philox known-answer vectors") {
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("open-unit conversion never hits the ends") {
    CHECK(to_open_unit(0) > 0.0);
    CHECK(to_open_unit(~uint64_t{0}) < 1.0);
}

TEST_CASE("philox uniforms look uniform") {
    const Philox rng(42, 1, 2);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n / 2; ++i) {
        for (double u : rng.uniforms(i)) {
            s += u;
            s2 += u * u;
        }
    }
    CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.005);
    const Philox other(42, 1, 3);
    CHECK(other.block(0) != rng.block(0));
}

TEST_CASE("single path gives a flat channel") {
    const auto ch = rician_channel(64, 1, 6.0, 7);
    for (const auto& h : ch.h) {
        CHECK(std::abs(h) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("infinite K gives a deterministic channel") {
    const double inf = std::numeric_limits<double>::infinity();
    const auto a = rician_channel(32, 4, inf, 1);
    const auto b = rician_channel(32, 4, inf, 99);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.h[i] == b.h[i]);
        CHECK(std::abs(a.h[i]) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("four-path Rician channel is normalized and frequency selective") {
    double mean_var = 0.0;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        const auto ch = rician_channel(64, 4, 6.0, seed);
        const auto g = ch.gains();
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / 64.0;
        CHECK(std::abs(mean - 1.0) < 1e-12);
        double var = 0.0;
        for (double v : g) {
            var += (v - mean) * (v - mean);
        }
        mean_var += var / 64.0;
    }
    CHECK(mean_var / 1000.0 > 0.05);
}

TEST_CASE("channel is a deterministic function of the seed") {
    const auto a = rician_channel(64, 4, 6.0, 5);
    const auto b = rician_channel(64, 4, 6.0, 5);
    const auto c = rician_channel(64, 4, 6.0, 6);
    CHECK(a.h == b.h);
    CHECK(a.h != c.h);
    CHECK(a.meta.paths == 4);
    CHECK(a.meta.seed == 5);
}

TEST_CASE("channel argument checks") {
    CHECK_THROWS_AS(rician_channel(8, 0, 6.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(rician_channel(8, 9, 6.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(rician_channel(8, 2, std::nan(""), 0), std::invalid_argument);
}
