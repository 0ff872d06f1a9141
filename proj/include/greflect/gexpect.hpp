#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "greflect/gbm.hpp"
#include "greflect/grid_paths.hpp"

namespace greflect {

using PathPayoff = std::function<double(const GScenario&)>;
using PathEvent = std::function<bool(const GScenario&)>;
/// Per-instant functional eta_t evaluated at grid index k.
using InstantFunctional = std::function<double(const GScenario&, Eigen::Index)>;

struct ControlEstimate {
    std::string label;
    double mean = 0.0;
    double se = 0.0;
    long n = 0;
};

/// Per-control Monte Carlo means and the finite-family sup/inf.
struct EstimateRecord {
    std::vector<ControlEstimate> per_control;
    double upper = 0.0;
    double lower = 0.0;
    std::string argmax;

    std::string to_json() const;
};

/// Monte Carlo upper expectation over the control family with common random
/// numbers: path i uses the identical noise stream under every control.
EstimateRecord upper_expectation(const PathPayoff& payoff,
                                 const std::vector<VolatilityControl>& family,
                                 const TimeGrid& grid, long n_paths, std::uint64_t seed);

/// Same ensemble, many payoffs; scenarios are generated once per
/// (control, path) and shared across payoffs.
std::vector<EstimateRecord> upper_expectation_multi(
    std::span<const PathPayoff> payoffs, const std::vector<VolatilityControl>& family,
    const TimeGrid& grid, long n_paths, std::uint64_t seed);

/// max over controls of the empirical event frequency (common seeds).
double capacity(const PathEvent& event, const std::vector<VolatilityControl>& family,
                const TimeGrid& grid, long n_paths, std::uint64_t seed);

/// ( (1/T) integral of upper expectations of |eta_t|^p dt )^(1/p), trapezoid
/// in time, supremum over the family taken per instant.
double mg_norm(const InstantFunctional& eta, double p,
               const std::vector<VolatilityControl>& family, const TimeGrid& grid,
               long n_paths, std::uint64_t seed);

enum class Integrator { DB, DQV };

struct BdgReport {
    double p = 2.0;
    Integrator integrator = Integrator::DB;
    double c_p = 4.0;       // constant actually used (1 for DQV)
    double lhs = 0.0;       // upper expectation of sup |integral|^p
    double rhs = 0.0;       // the moment bound
    double ratio = 0.0;     // lhs / rhs, 0 when both vanish
    long n_paths = 0;

    std::string to_json() const;
};

/// Doob-type constant for the dB bound: 4 at p = 2, (p/(p-1))^p p^(p/2)
/// otherwise.
double default_bdg_constant(double p);

/// Compares Ehat[ sup_u | int_0^u eta dI |^p ] against the moment bound;
/// p >= 1 for the d<B> integrator, p >= 2 for dB.
BdgReport bdg_check(const InstantFunctional& eta, double p, Integrator integrator,
                    const std::vector<VolatilityControl>& family, const TimeGrid& grid,
                    long n_paths, std::uint64_t seed, double c_p = -1.0);

/// Explicit finite-difference solution of du/dt = G(d2u/dx2).
struct PdeSolution {
    Eigen::ArrayXd x;       // space grid
    Eigen::ArrayXd u;       // values at t = T
    double dt = 0.0;
    double dx = 0.0;
    VolatilityBand band;

    double u_at(double x_query) const;
};

/// Solves on [x0 - half_width, x0 + half_width] with nx intervals; time step
/// 0.9 dx^2 / (2 sigma_high^2) rounded so the horizon is hit exactly; zero
/// second difference at the two boundary rows. u_at(x0) is the oracle for
/// the upper expectation of payoff(x0 + B_T).
PdeSolution gheat_solve(const std::function<double(double)>& payoff,
                        const VolatilityBand& band, double T, double x0,
                        double half_width, Eigen::Index nx);

/// CSV with header `x,u`.
void write_pde_csv(const PdeSolution& pde, const std::filesystem::path& file);

}  // namespace greflect
