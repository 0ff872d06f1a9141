#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace greflect {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    Simulate,
    Picard,
    Expectation,
    Capacity,
    CheckIto,
    CheckBdg,
    CheckQv,
    Compare,
    Stability,
    Gheat,
    Skorokhod,
};

std::string kind_name(ExperimentKind kind);
std::optional<ExperimentKind> kind_from_name(const std::string& name);

/// Textual RGSDE problem block (expressions plus declared Lipschitz bounds).
struct ProblemConfig {
    double x0 = 0.0;
    std::string f = "0";
    double f_lip = 0.0;
    std::string h = "0";
    double h_lip = 0.0;
    std::string g = "1";
    double g_lip = 0.0;
    double s0 = 0.0;
    std::string obstacle_f = "0";
    double obstacle_f_lip = 0.0;
    std::string obstacle_h = "0";
    double obstacle_h_lip = 0.0;
    std::string obstacle_g = "0";
    double obstacle_g_lip = 0.0;

    bool operator==(const ProblemConfig&) const = default;
};

/// Fully resolved experiment description. Parsing is strict: unknown keys
/// and keys that do not apply to the kind are errors.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Simulate;
    double T = 1.0;
    long N = 1000;
    int levels = 3;
    std::uint64_t seed = 0;
    long paths = 1;
    double band_low_sq = 0.25;
    double band_high_sq = 1.0;  // paper default
    std::string control = "constant:1";
    int family_constants = 3;
    bool family_bang_bang = false;
    double family_switch_intensity = 0.0;
    ProblemConfig problem;    // base problem (also "p1." for compare)
    ProblemConfig problem2;   // "p2." block, compare only
    double tol = 1e-8;
    int max_iter = 100;
    double p = 3.0;
    std::string payoff = "b*b";
    std::string eta = "1";
    std::string integrator = "db";
    double cp = 0.0;  // 0 = use the default constant
    std::string phi = "all";
    std::vector<double> deltas = {0.01, 0.02, 0.04};
    std::string stability_target = "x0";
    double gheat_x0 = 0.0;
    double gheat_half_width = 6.0;
    long gheat_nx = 600;

    bool operator==(const ExperimentSpec&) const = default;
};

/// Parses the flat `key = value` format (see docs/formats.md). When
/// cli_kind is given, the config's kind key may be omitted; if present it
/// must agree.
ExperimentSpec parse_config(const std::string& text,
                            std::optional<ExperimentKind> cli_kind = {});

/// Canonical text form; parse_config(serialize(spec)) == spec.
std::string serialize(const ExperimentSpec& spec);

/// Key/value pairs in canonical order (the serialize payload).
std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentSpec& spec);

}  // namespace greflect
