#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "greflect/ito_check.hpp"

using namespace greflect;

namespace {

const VolatilityControl kUnitControl = VolatilityControl::constant(1.0, {1.0, 1.0});

RgsdeProblem reflected_bm_problem() {
    RgsdeProblem p;
    p.g = Coefficient::constant(1.0);
    return p;
}

RgsdeProblem unreflected_bm_problem() {
    RgsdeProblem p;
    p.g = Coefficient::constant(1.0);
    p.obstacle = ObstacleSpec::constant(-1e9);
    return p;
}

}  // namespace

TEST_CASE("test function fixtures") {
    const TestFunction quad = make_test_function("quadratic");
    CHECK(quad.phi(2.0) == 4.0);
    CHECK(quad.dphi(2.0) == 4.0);
    CHECK(quad.d2phi(2.0) == 2.0);
    CHECK(quad.growth == TestFunction::Growth::BoundedLipschitzDerivs);

    const TestFunction ppc = make_test_function("positive_part_cubed");
    CHECK(ppc.phi(-1.0) == 0.0);
    CHECK(ppc.dphi(-1.0) == 0.0);
    CHECK(ppc.d2phi(-1.0) == 0.0);
    CHECK(ppc.phi(2.0) == 8.0);
    CHECK(ppc.dphi(2.0) == 12.0);
    CHECK(ppc.d2phi(2.0) == 12.0);
    CHECK(ppc.growth == TestFunction::Growth::PolynomialGrowth);

    const double coeffs[] = {0.0, 0.0, 0.0, 1.0};
    const TestFunction cubic = make_test_function("polynomial", coeffs);
    CHECK(cubic.phi(2.0) == 8.0);
    CHECK(cubic.d2phi(2.0) == 12.0);
    CHECK(cubic.growth == TestFunction::Growth::PolynomialGrowth);

    CHECK_NOTHROW(make_test_function("smooth_bump"));
    CHECK_NOTHROW(make_test_function("cubic"));
    CHECK_THROWS_AS(make_test_function("septic"), std::invalid_argument);
    CHECK_THROWS_AS(make_test_function("polynomial", {}), std::invalid_argument);
}

TEST_CASE("linear test functions telescope to zero residual") {
    const double coeffs[] = {0.5, 1.0};
    const TestFunction linear = make_test_function("polynomial", coeffs);
    const RgsdeProblem p = reflected_bm_problem();
    for (int i = 0; i < 20; ++i) {
        const GScenario sc = simulate_scenario(kUnitControl, make_grid(1.0, 256), 7, i);
        const RgsdeSolution sol = euler_reflected(p, sc);
        CHECK(ito_residual(linear, sol, p, sc) <= 1e-12);
    }
}

TEST_CASE("quadratic on unreflected Brownian motion reduces to the QV residual") {
    const TestFunction quad = make_test_function("quadratic");
    const RgsdeProblem p = unreflected_bm_problem();
    for (int i = 0; i < 20; ++i) {
        const GScenario sc = simulate_scenario(kUnitControl, make_grid(1.0, 512), 11, i);
        const RgsdeSolution sol = euler_reflected(p, sc);
        const double residual = ito_residual(quad, sol, p, sc);
        const QvIdentityResidual qv = qv_identity_residual(sc);
        CHECK(residual == doctest::Approx(std::abs(qv.limit_part)).epsilon(1e-8));
    }
}

TEST_CASE("pure pusher dynamics obey the second-order Taylor bound") {
    // f = h = g = 0 and x = x0 + k: the residual is the one-term chain-rule
    // defect, bounded by max|phi''| sum (dk)^2 / 2.
    const TimeGrid grid = make_grid(1.0, 64);
    Eigen::ArrayXd k(grid.size());
    k(0) = 0.0;
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        k(i) = k(i - 1) + (i % 7 == 0 ? 0.05 : 0.002);

    RgsdeSolution sol;
    sol.x_path = SamplePath(grid, 0.25 + k);
    sol.k_path = IncreasingPath(SamplePath(grid, k));
    sol.y_path = constant_path(grid, 0.25);
    sol.s_path = constant_path(grid, 0.25);
    RgsdeProblem p;  // all coefficients zero
    p.x0 = 0.25;

    GScenario sc;
    sc.grid = grid;
    sc.b = Eigen::ArrayXd::Zero(grid.size());
    sc.qv = Eigen::ArrayXd::Zero(grid.size());
    sc.sigma_sq = Eigen::ArrayXd::Ones(grid.size());
    sc.db = Eigen::ArrayXd::Zero(grid.size() - 1);
    sc.dqv = Eigen::ArrayXd::Zero(grid.size() - 1);

    double dk_sq = 0.0;
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
        const double dk = k(i + 1) - k(i);
        dk_sq += dk * dk;
    }
    for (const char* tag : {"quadratic", "smooth_bump"}) {
        const TestFunction phi = make_test_function(tag);
        double max_d2 = 0.0;
        for (double x = -0.5; x <= 2.0; x += 0.01)
            max_d2 = std::max(max_d2, std::abs(phi.d2phi(x)));
        CHECK(ito_residual(phi, sol, p, sc) <= 0.5 * max_d2 * dk_sq + 1e-14);
    }
}

TEST_CASE("residual operator is subadditive in the test function") {
    const RgsdeProblem p = reflected_bm_problem();
    const double c_quad[] = {0.0, 0.0, 1.0};
    const double c_cubic[] = {0.0, 0.0, 0.0, 1.0};
    const double c_sum[] = {0.0, 0.0, 1.0, 1.0};
    const TestFunction f1 = make_test_function("polynomial", c_quad);
    const TestFunction f2 = make_test_function("polynomial", c_cubic);
    const TestFunction f12 = make_test_function("polynomial", c_sum);
    for (int i = 0; i < 20; ++i) {
        const GScenario sc = simulate_scenario(kUnitControl, make_grid(1.0, 128), 13, i);
        const RgsdeSolution sol = euler_reflected(p, sc);
        const double r1 = ito_residual(f1, sol, p, sc);
        const double r2 = ito_residual(f2, sol, p, sc);
        const double r12 = ito_residual(f12, sol, p, sc);
        CHECK(r12 <= r1 + r2 + 1e-12);
    }
}

TEST_CASE("median residual decreases under mesh refinement for the fixture family") {
    const RgsdeProblem p = reflected_bm_problem();
    const int n_paths = 2000;
    for (const char* tag : {"quadratic", "cubic", "positive_part_cubed"}) {
        const TestFunction phi = make_test_function(tag);
        double prev_median = -1.0;
        for (Eigen::Index n : {128, 256, 512}) {
            const TimeGrid grid = make_grid(1.0, n);
            std::vector<double> residuals(n_paths);
            for (int i = 0; i < n_paths; ++i) {
                const GScenario sc = simulate_scenario(kUnitControl, grid, 17, i);
                const RgsdeSolution sol = euler_reflected(p, sc);
                residuals[static_cast<std::size_t>(i)] = ito_residual(phi, sol, p, sc);
            }
            std::sort(residuals.begin(), residuals.end());
            const double median = residuals[residuals.size() / 2];
            if (prev_median >= 0.0) CHECK(median < prev_median);
            prev_median = median;
        }
    }
}

TEST_CASE("ito_residual rejects mismatched grids") {
    const RgsdeProblem p = reflected_bm_problem();
    const GScenario sc = simulate_scenario(kUnitControl, make_grid(1.0, 32), 19, 0);
    const RgsdeSolution sol = euler_reflected(p, sc);
    const GScenario other = simulate_scenario(kUnitControl, make_grid(1.0, 64), 19, 0);
    CHECK_THROWS_AS(ito_residual(make_test_function("quadratic"), sol, p, other),
                    std::invalid_argument);
}
