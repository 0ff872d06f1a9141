#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greflect/gbm.hpp"
#include "greflect/grid_paths.hpp"
#include "greflect/skorokhod.hpp"

namespace greflect {

/// Path-level abort (non-finite coefficient output, non-convergence, ...).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Coefficient of the dynamics; omega-dependence enters only through
/// (t, x, B_t, <B>_t). Must be reentrant.
struct Coefficient {
    std::function<double(double t, double x, double b, double qv)> fn;
    double lipschitz_bound = 0.0;
    std::string label;

    double operator()(double t, double x, double b, double qv) const {
        return fn(t, x, b, qv);
    }

    static Coefficient constant(double v);
    static Coefficient make(std::function<double(double, double, double, double)> fn,
                            double lipschitz_bound, std::string label);
};

struct LipschitzAudit {
    double max_slope = 0.0;
    bool ok = true;
};

/// Samples finite-difference slopes in x over a probe box; ok is false when
/// a slope exceeds the declared bound by more than 5%.
LipschitzAudit audit_lipschitz(const Coefficient& c, double horizon,
                               double x_lo = -4.0, double x_hi = 4.0,
                               int n_probes = 33);

/// Obstacle as an Ito-type process with its own drift, QV-drift and
/// diffusion coefficients.
struct ObstacleSpec {
    double s0 = 0.0;
    Coefficient f = Coefficient::constant(0.0);
    Coefficient h = Coefficient::constant(0.0);
    Coefficient g = Coefficient::constant(0.0);

    static ObstacleSpec constant(double level);
};

struct RgsdeProblem {
    double x0 = 0.0;
    Coefficient f = Coefficient::constant(0.0);
    Coefficient h = Coefficient::constant(0.0);
    Coefficient g = Coefficient::constant(0.0);
    ObstacleSpec obstacle;

    /// Rejects s0 > x0; runs the Lipschitz audits (warnings to stderr).
    void validate(double horizon = 1.0) const;
};

struct RgsdeDiagnostics {
    double flat_off_right = 0.0;
    double flat_off_left = 0.0;
    double k_representation = 0.0;
};

struct RgsdeSolution {
    SamplePath x_path;
    IncreasingPath k_path;
    SamplePath y_path;  // accumulated drift/diffusion part
    SamplePath s_path;  // simulated obstacle
    RgsdeDiagnostics diagnostics;
};

/// Euler discretization of the obstacle with left-endpoint coefficients.
SamplePath simulate_obstacle(const ObstacleSpec& spec, const GScenario& scenario);

/// Reflected Euler scheme: coefficients at the left endpoint along the
/// reflected state, pusher via the running-max representation, clamping per
/// the reflection map.
RgsdeSolution euler_reflected(const RgsdeProblem& problem, const GScenario& scenario);

/// max_t | k_t - max_{u<=t}(y_u - s_u)^- |.
double k_representation_residual(const RgsdeSolution& sol, const SamplePath& obstacle_path);

struct PicardResult {
    RgsdeSolution solution;
    std::vector<double> distances;  // sup-distance per iteration
    bool converged = false;
    int iterations = 0;
};

/// Fixed-point iteration: coefficients along the previous iterate, then
/// reflection against the simulated obstacle. Non-convergence is reported in
/// the result, never silently accepted.
PicardResult picard_solve(const RgsdeProblem& problem, const GScenario& scenario,
                          double tol, int max_iter,
                          const std::optional<SamplePath>& initial_iterate = {});

/// max_t (X1_t - X2_t)^+ for the two reflected Euler solutions on the same
/// scenario; rejects problems whose diffusion labels differ.
double comparison_violation(const RgsdeProblem& p1, const RgsdeProblem& p2,
                            const GScenario& scenario);

/// Monte Carlo mean over the ensemble of sup_t |X1_t - X2_t|^p, p > 2.
double stability_gap(const RgsdeProblem& p1, const RgsdeProblem& p2,
                     std::span<const GScenario> scenarios, double p);

/// CSV with header `t,x,k,y,s`.
void write_solution_csv(const RgsdeSolution& sol, const std::filesystem::path& file);

}  // namespace greflect
