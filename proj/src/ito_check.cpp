#include "greflect/ito_check.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace greflect {

namespace {

// Probe points straddle zero without landing on it, so kinked second
// derivatives (the positive-part family) still pass the audit.
void audit_derivatives(const TestFunction& f) {
    for (int i = 0; i < 17; ++i) {
        const double x = -2.05 + 0.25 * static_cast<double>(i);
        const double h = 1e-5 * (1.0 + std::abs(x));
        const double fd1 = (f.phi(x + h) - f.phi(x - h)) / (2.0 * h);
        const double d1 = f.dphi(x);
        if (std::abs(fd1 - d1) > 1e-6 * std::max(1.0, std::abs(d1)))
            throw std::invalid_argument("TestFunction '" + f.tag +
                                        "': dphi disagrees with finite differences");
        const double fd2 = (f.dphi(x + h) - f.dphi(x - h)) / (2.0 * h);
        const double d2 = f.d2phi(x);
        if (std::abs(fd2 - d2) > 1e-6 * std::max(1.0, std::abs(d2)))
            throw std::invalid_argument("TestFunction '" + f.tag +
                                        "': d2phi disagrees with finite differences");
    }
}

TestFunction make_polynomial(std::span<const double> coeffs) {
    if (coeffs.empty())
        throw std::invalid_argument("make_test_function: polynomial needs coefficients");
    const std::vector<double> c(coeffs.begin(), coeffs.end());
    auto horner = [](const std::vector<double>& cs, double x) {
        double acc = 0.0;
        for (std::size_t i = cs.size(); i-- > 0;) acc = acc * x + cs[i];
        return acc;
    };
    std::vector<double> d1(c.size() > 1 ? c.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < c.size(); ++i) d1[i - 1] = static_cast<double>(i) * c[i];
    std::vector<double> d2(d1.size() > 1 ? d1.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < d1.size(); ++i) d2[i - 1] = static_cast<double>(i) * d1[i];
    TestFunction f;
    f.tag = "polynomial";
    f.growth = c.size() > 3 ? TestFunction::Growth::PolynomialGrowth
                            : TestFunction::Growth::BoundedLipschitzDerivs;
    f.phi = [c, horner](double x) { return horner(c, x); };
    f.dphi = [d1, horner](double x) { return horner(d1, x); };
    f.d2phi = [d2, horner](double x) { return horner(d2, x); };
    return f;
}

}  // namespace

TestFunction make_test_function(const std::string& tag, std::span<const double> params) {
    TestFunction f;
    f.tag = tag;
    if (tag == "quadratic") {
        f.phi = [](double x) { return x * x; };
        f.dphi = [](double x) { return 2.0 * x; };
        f.d2phi = [](double) { return 2.0; };
    } else if (tag == "cubic") {
        f.phi = [](double x) { return x * x * x; };
        f.dphi = [](double x) { return 3.0 * x * x; };
        f.d2phi = [](double x) { return 6.0 * x; };
        f.growth = TestFunction::Growth::PolynomialGrowth;
    } else if (tag == "positive_part_cubed") {
        f.phi = [](double x) { const double p = x > 0.0 ? x : 0.0; return p * p * p; };
        f.dphi = [](double x) { const double p = x > 0.0 ? x : 0.0; return 3.0 * p * p; };
        f.d2phi = [](double x) { return x > 0.0 ? 6.0 * x : 0.0; };
        f.growth = TestFunction::Growth::PolynomialGrowth;
    } else if (tag == "smooth_bump") {
        f.phi = [](double x) { return std::exp(-x * x); };
        f.dphi = [](double x) { return -2.0 * x * std::exp(-x * x); };
        f.d2phi = [](double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); };
    } else if (tag == "polynomial") {
        f = make_polynomial(params);
    } else {
        throw std::invalid_argument("make_test_function: unknown tag '" + tag + "'");
    }
    audit_derivatives(f);
    return f;
}

double ito_residual(const TestFunction& phi, const RgsdeSolution& sol,
                    const RgsdeProblem& problem, const GScenario& scenario) {
    if (!sol.x_path.grid.same_grid(scenario.grid))
        throw std::invalid_argument("ito_residual: solution and scenario grids differ");
    const Eigen::ArrayXd& x = sol.x_path.values;
    const Eigen::Index n = x.size();

    Eigen::ArrayXd dphi_x(n);
    for (Eigen::Index k = 0; k < n; ++k) dphi_x(k) = phi.dphi(x(k));

    double dt_term = 0.0, dqv_term = 0.0, db_term = 0.0, second_order = 0.0;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double t = scenario.grid.t(k);
        const double fv = problem.f(t, x(k), scenario.b(k), scenario.qv(k));
        const double hv = problem.h(t, x(k), scenario.b(k), scenario.qv(k));
        const double gv = problem.g(t, x(k), scenario.b(k), scenario.qv(k));
        dt_term += dphi_x(k) * fv * scenario.grid.dt(k);
        dqv_term += dphi_x(k) * hv * scenario.dqv(k);
        db_term += dphi_x(k) * gv * scenario.db(k);
        second_order += 0.5 * phi.d2phi(x(k)) * gv * gv * scenario.dqv(k);
    }
    const double dk_term = riemann_sum_vn(SamplePath(scenario.grid, dphi_x), sol.k_path.path,
                                          EndpointRule::Left);
    const double lhs = phi.phi(x(n - 1)) - phi.phi(x(0));
    const double rhs = dt_term + dqv_term + db_term + dk_term + second_order;
    return std::abs(lhs - rhs);
}

}  // namespace greflect
