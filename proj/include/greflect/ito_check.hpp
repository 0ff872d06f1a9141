#pragma once

#include <functional>
#include <span>
#include <string>

#include "greflect/rgsde.hpp"

namespace greflect {

/// Twice-differentiable test function with its analytic derivatives; the
/// triple is audited by central finite differences on construction.
struct TestFunction {
    enum class Growth { BoundedLipschitzDerivs, PolynomialGrowth };

    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    std::function<double(double)> d2phi;
    std::string tag;
    Growth growth = Growth::BoundedLipschitzDerivs;
};

/// Tags: quadratic, cubic, positive_part_cubed, smooth_bump,
/// polynomial (params = coefficients c0 + c1 x + c2 x^2 + ...).
TestFunction make_test_function(const std::string& tag, std::span<const double> params = {});

/// |Phi(X_T) - Phi(X_0) - (left-endpoint sums of the five integral terms)|.
double ito_residual(const TestFunction& phi, const RgsdeSolution& sol,
                    const RgsdeProblem& problem, const GScenario& scenario);

}  // namespace greflect
