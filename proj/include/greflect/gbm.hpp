#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "greflect/grid_paths.hpp"

namespace greflect {

/// Variance-rate band [sigma_low^2, sigma_high^2], 0 < low <= high.
struct VolatilityBand {
    double sigma_low_sq = 0.25;
    double sigma_high_sq = 1.0;

    void validate() const;
};

/// G(a) = (a+ * sigma_high^2 - a- * sigma_low^2) / 2.
double g_function(double a, const VolatilityBand& band);

/// One admissible volatility law. The realized variance rate at step k may
/// depend only on information up to t_k.
class VolatilityControl {
  public:
    enum class Kind { Constant, PiecewiseConstant, BangBang, RandomSwitch };

    static VolatilityControl constant(double sigma_sq, VolatilityBand band);
    static VolatilityControl piecewise_constant(std::vector<double> breakpoints,
                                                std::vector<double> sigma_sqs,
                                                VolatilityBand band);
    /// sigma_high^2 when (state > threshold) == above, else sigma_low^2.
    static VolatilityControl bang_bang(double threshold, bool above, VolatilityBand band);
    /// Two-state Markov switch between the band edges with the given
    /// intensity; switching noise lives on its own counter lane.
    static VolatilityControl random_switch(double intensity, std::uint64_t stream,
                                           VolatilityBand band);

    Kind kind() const { return kind_; }
    const VolatilityBand& band() const { return band_; }
    const std::string& label() const { return label_; }

    /// Variance rate for step k given the left-endpoint state.
    double sigma_sq_at(double t, double b_state, std::uint64_t seed,
                       std::uint64_t path, Eigen::Index step, double dt,
                       bool& switch_state) const;
    /// Switching state at t = 0 (RandomSwitch starts at the band top).
    bool initial_switch_state() const { return true; }

  private:
    VolatilityControl() = default;

    Kind kind_ = Kind::Constant;
    VolatilityBand band_;
    std::string label_;
    double constant_sq_ = 1.0;
    std::vector<double> breakpoints_;
    std::vector<double> piece_values_;
    double threshold_ = 0.0;
    bool above_ = true;
    double intensity_ = 0.0;
    std::uint64_t stream_ = 0;
};

/// One trajectory triple (B, <B>, sigma^2) under a control. The per-step
/// increments are stored as generated so consumers accumulate the exact
/// doubles the simulation used (b(k+1) = b(k) + db(k), same for qv).
struct GScenario {
    TimeGrid grid;
    Eigen::ArrayXd b;         // Brownian level, b(0) = 0
    Eigen::ArrayXd qv;        // compensator sum of sigma^2 dt, qv(0) = 0
    Eigen::ArrayXd sigma_sq;  // realized rate per step; last entry repeats
    Eigen::ArrayXd db;        // one increment per step
    Eigen::ArrayXd dqv;       // one increment per step
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    SamplePath b_path() const { return SamplePath(grid, b); }
    SamplePath qv_path() const { return SamplePath(grid, qv); }
};

/// Deterministic function of (control, grid, seed, path_index). The noise
/// stream depends only on (seed, path_index, step), never on the control.
GScenario simulate_scenario(const VolatilityControl& control, const TimeGrid& grid,
                            std::uint64_t seed, std::uint64_t path_index = 0);

struct QvIdentityResidual {
    double exact_part;  // B_T^2 - 2 sum B dB - sum (dB)^2, telescopes to ~0
    double limit_part;  // sum (dB)^2 - qv_T, statistical discretization error
};

QvIdentityResidual qv_identity_residual(const GScenario& scenario);

/// Finite dictionary standing in for the measure family.
struct FamilySpec {
    int n_constants = 3;
    bool include_bang_bang = false;
    double switch_intensity = 0.0;  // > 0 adds a random-switch control
    VolatilityBand band;
};

/// m constants evenly spanning the band (m = 1 collapses to the upper edge),
/// plus optional bang-bang and random-switch entries.
std::vector<VolatilityControl> build_family(const FamilySpec& spec);

/// CSV with header `t,b,qv,sigma_sq`.
void write_scenario_csv(const GScenario& scenario, const std::filesystem::path& file);

}  // namespace greflect
