#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "greflect/gbm.hpp"

using namespace greflect;

namespace {
const VolatilityBand kBand{0.25, 1.0};
}

TEST_CASE("g_function branches") {
    CHECK(g_function(0.0, kBand) == 0.0);
    CHECK(g_function(2.0, kBand) == 1.0);
    CHECK(g_function(-2.0, kBand) == -0.25);
}

TEST_CASE("g_function positive homogeneity and monotonicity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double a = unif(rng);
        for (double lam : {0.0, 0.5, 1.0, 2.0, 8.0})  // powers of two scale exactly
            CHECK(g_function(lam * a, kBand) == lam * g_function(a, kBand));
        const double b = unif(rng);
        if (a <= b)
            CHECK(g_function(a, kBand) <= g_function(b, kBand));
        else
            CHECK(g_function(b, kBand) <= g_function(a, kBand));
    }
}

TEST_CASE("band validation") {
    CHECK_THROWS_AS((VolatilityBand{0.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((VolatilityBand{2.0, 1.0}).validate(), std::invalid_argument);
    CHECK_NOTHROW((VolatilityBand{1.0, 1.0}).validate());
    CHECK_THROWS_AS(VolatilityControl::constant(2.0, kBand), std::invalid_argument);
    CHECK_THROWS_AS(VolatilityControl::constant(0.1, kBand), std::invalid_argument);
}

TEST_CASE("scenario terminal variance matches the classical oracle") {
    // Var(B_T) = sigma^2 T for a constant control, any step count.
    const VolatilityControl control = VolatilityControl::constant(1.0, {1.0, 1.0});
    const TimeGrid grid = make_grid(1.0, 8);
    const long n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < n; ++i) {
        const GScenario sc = simulate_scenario(control, grid, 2024, i);
        const double bT = sc.b(sc.b.size() - 1);
        sum += bT;
        sum_sq += bT * bT;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    // SE of the sample variance of a normal is about T sqrt(2/n).
    const double se = std::sqrt(2.0 / n);
    CHECK(std::abs(var - 1.0) < 3.0 * se);
}

TEST_CASE("qv stays inside the band envelope exactly") {
    const TimeGrid grid = make_grid(2.0, 257);
    std::vector<VolatilityControl> controls = build_family({3, true, 5.0, kBand});
    for (std::size_t c = 0; c < controls.size(); ++c) {
        const GScenario sc = simulate_scenario(controls[c], grid, 7, c);
        // Accumulate the band envelopes with the same scheme the simulation
        // uses; monotone rounding makes the comparison exact.
        double lo = 0.0, hi = 0.0;
        for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
            CHECK(sc.dqv(k) == sc.sigma_sq(k) * grid.dt(k));
            CHECK(sc.qv(k + 1) == sc.qv(k) + sc.dqv(k));
            lo += kBand.sigma_low_sq * grid.dt(k);
            hi += kBand.sigma_high_sq * grid.dt(k);
            CHECK(sc.qv(k + 1) >= lo);
            CHECK(sc.qv(k + 1) <= hi);
        }
        CHECK(sc.qv(0) == 0.0);
    }
}

TEST_CASE("constant quarter-rate control pins qv_T exactly") {
    const VolatilityControl control = VolatilityControl::constant(0.25, kBand);
    const TimeGrid grid = make_grid(1.0, 1000);
    const GScenario sc = simulate_scenario(control, grid, 3, 0);
    CHECK(sc.qv(1000) == 0.25 * 1.0);  // power-of-two rate scales exactly
}

TEST_CASE("scenarios are bitwise reproducible") {
    const VolatilityControl control = VolatilityControl::bang_bang(0.0, true, kBand);
    const TimeGrid grid = make_grid(1.0, 64);
    const GScenario a = simulate_scenario(control, grid, 11, 4);
    const GScenario b = simulate_scenario(control, grid, 11, 4);
    CHECK((a.b == b.b).all());
    CHECK((a.qv == b.qv).all());
    CHECK((a.sigma_sq == b.sigma_sq).all());
    const GScenario other = simulate_scenario(control, grid, 11, 5);
    CHECK((a.b != other.b).any());
}

TEST_CASE("common random numbers: constant controls share the noise stream") {
    const TimeGrid grid = make_grid(1.0, 128);
    const GScenario full = simulate_scenario(VolatilityControl::constant(1.0, kBand), grid, 9, 2);
    const GScenario quarter =
        simulate_scenario(VolatilityControl::constant(0.25, kBand), grid, 9, 2);
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k)
        CHECK(quarter.db(k) == 0.5 * full.db(k));  // sqrt(0.25) is exact
}

TEST_CASE("constant controls share prefixes across grids with a common head") {
    // t_k = k/64 on both grids for k <= 64, so the first 64 steps coincide.
    const VolatilityControl control = VolatilityControl::constant(1.0, kBand);
    const GScenario longer = simulate_scenario(control, make_grid(2.0, 128), 15, 6);
    const GScenario shorter = simulate_scenario(control, make_grid(1.0, 64), 15, 6);
    for (Eigen::Index k = 0; k <= 64; ++k) CHECK(longer.b(k) == shorter.b(k));
}

TEST_CASE("piecewise control switches rate at its breakpoints") {
    const VolatilityControl control =
        VolatilityControl::piecewise_constant({0.5}, {0.25, 1.0}, kBand);
    const GScenario sc = simulate_scenario(control, make_grid(1.0, 64), 21, 0);
    for (Eigen::Index k = 0; k + 1 < sc.grid.size(); ++k)
        CHECK(sc.sigma_sq(k) == (sc.grid.t(k) < 0.5 ? 0.25 : 1.0));
    CHECK_THROWS_AS(VolatilityControl::piecewise_constant({0.5}, {0.25}, kBand),
                    std::invalid_argument);
    CHECK_THROWS_AS(VolatilityControl::piecewise_constant({0.5, 0.25}, {1.0, 1.0, 1.0}, kBand),
                    std::invalid_argument);
}

TEST_CASE("bang-bang control uses the left-endpoint state") {
    const TimeGrid grid = make_grid(1.0, 64);
    const GScenario sc = simulate_scenario(VolatilityControl::bang_bang(0.0, true, kBand),
                                           grid, 13, 0);
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
        const double expected = sc.b(k) > 0.0 ? kBand.sigma_high_sq : kBand.sigma_low_sq;
        CHECK(sc.sigma_sq(k) == expected);
    }
}

TEST_CASE("random switch stays on the band edges and is deterministic") {
    const VolatilityControl control = VolatilityControl::random_switch(4.0, 42, kBand);
    const TimeGrid grid = make_grid(1.0, 128);
    const GScenario a = simulate_scenario(control, grid, 17, 0);
    const GScenario b = simulate_scenario(control, grid, 17, 0);
    CHECK((a.sigma_sq == b.sigma_sq).all());
    bool saw_low = false, saw_high = false;
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
        const bool low = a.sigma_sq(k) == kBand.sigma_low_sq;
        const bool high = a.sigma_sq(k) == kBand.sigma_high_sq;
        CHECK((low || high));
        saw_low = saw_low || low;
        saw_high = saw_high || high;
    }
    CHECK(saw_low);
    CHECK(saw_high);
}

TEST_CASE("qv identity: telescoping part vanishes to rounding") {
    const TimeGrid grid = make_grid(1.0, 512);
    const std::vector<VolatilityControl> family = build_family({3, true, 3.0, kBand});
    for (std::size_t c = 0; c < family.size(); ++c) {
        for (int i = 0; i < 25; ++i) {
            const GScenario sc = simulate_scenario(family[c], grid, 23, i);
            const QvIdentityResidual r = qv_identity_residual(sc);
            const double bT = sc.b(sc.b.size() - 1);
            CHECK(std::abs(r.exact_part) <= 1e-10 * (1.0 + bT * bT));
        }
    }
}

TEST_CASE("qv identity: degenerate one-step grid") {
    const GScenario sc = simulate_scenario(VolatilityControl::constant(1.0, kBand),
                                           make_grid(1.0, 1), 29, 0);
    const QvIdentityResidual r = qv_identity_residual(sc);
    const double bT = sc.b(1);
    CHECK(std::abs(r.exact_part) <= 1e-12 * (1.0 + bT * bT));
}

TEST_CASE("qv identity: limit part RMS shrinks like sqrt(mesh)") {
    const VolatilityControl control = VolatilityControl::constant(1.0, {1.0, 1.0});
    const int n_paths = 10000;
    double prev_rms = -1.0;
    for (Eigen::Index n : {64, 128, 256}) {
        const TimeGrid grid = make_grid(1.0, n);
        double acc = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            const QvIdentityResidual r =
                qv_identity_residual(simulate_scenario(control, grid, 31, i));
            acc += r.limit_part * r.limit_part;
        }
        const double rms = std::sqrt(acc / n_paths);
        if (prev_rms > 0.0) {
            const double ratio = prev_rms / rms;
            CHECK(ratio > 1.25);
            CHECK(ratio < 1.6);
        }
        prev_rms = rms;
    }
}

TEST_CASE("build_family spans the band") {
    const std::vector<VolatilityControl> f3 = build_family({3, false, 0.0, kBand});
    REQUIRE(f3.size() == 3);
    const GScenario a = simulate_scenario(f3[0], make_grid(1.0, 2), 1, 0);
    const GScenario b = simulate_scenario(f3[1], make_grid(1.0, 2), 1, 0);
    const GScenario c = simulate_scenario(f3[2], make_grid(1.0, 2), 1, 0);
    CHECK(a.sigma_sq(0) == 0.25);
    CHECK(b.sigma_sq(0) == 0.625);
    CHECK(c.sigma_sq(0) == 1.0);

    const std::vector<VolatilityControl> f1 = build_family({1, false, 0.0, kBand});
    REQUIRE(f1.size() == 1);
    CHECK(simulate_scenario(f1[0], make_grid(1.0, 2), 1, 0).sigma_sq(0) == 1.0);

    CHECK(build_family({3, true, 0.0, kBand}).size() == 4);
    CHECK(build_family({3, true, 2.0, kBand}).size() == 5);
    CHECK_THROWS_AS(build_family({0, false, 0.0, kBand}), std::invalid_argument);
}
