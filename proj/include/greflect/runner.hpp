#pragma once

#include <filesystem>

#include "greflect/config.hpp"
#include "greflect/gbm.hpp"
#include "greflect/rgsde.hpp"

namespace greflect {

inline constexpr const char* kVersion = "0.1.0";

/// Parses the control grammar: constant:<v>, piecewise:<t1|...>:<v0|...>,
/// bang_bang:<gt|le>:<threshold>, random_switch:<intensity>[:<stream>].
VolatilityControl control_from_string(const std::string& text, const VolatilityBand& band);

RgsdeProblem problem_from_config(const ProblemConfig& cfg);

/// Runs the experiment, writing its outputs plus manifest.json into out_dir.
/// Partial outputs are removed when a run aborts.
void run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

}  // namespace greflect
