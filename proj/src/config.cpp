#include "greflect/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "greflect/expr.hpp"
#include "greflect/grid_paths.hpp"

namespace greflect {

namespace {

const std::map<std::string, ExperimentKind> kKinds = {
    {"simulate", ExperimentKind::Simulate},   {"picard", ExperimentKind::Picard},
    {"expectation", ExperimentKind::Expectation}, {"capacity", ExperimentKind::Capacity},
    {"check_ito", ExperimentKind::CheckIto},  {"check_bdg", ExperimentKind::CheckBdg},
    {"check_qv", ExperimentKind::CheckQv},    {"compare", ExperimentKind::Compare},
    {"stability", ExperimentKind::Stability}, {"gheat", ExperimentKind::Gheat},
    {"skorokhod", ExperimentKind::Skorokhod},
};

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

// Typed setter/getter per key; applicability decided per kind.
struct KeyHandler {
    std::function<void(ExperimentSpec&, const std::string&)> set;
    std::function<std::string(const ExperimentSpec&)> get;
};

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("key " + key + ": not a real number ('" + value + "')");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("key " + key + ": not an integer ('" + value + "')");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw config_error("key " + key + ": expected true or false ('" + value + "')");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(key, strip(item)));
    if (out.empty()) throw config_error("key " + key + ": empty list");
    return out;
}

std::string render_real_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

void check_expression(const std::string& key, const std::string& text) {
    try {
        parse_coefficient_expr(text);
    } catch (const parse_error& e) {
        throw config_error("key " + key + ": " + e.what() + " (line " +
                           std::to_string(e.line) + ", column " + std::to_string(e.column) +
                           ")");
    }
}

void check_payoff_expression(const std::string& key, const std::string& text) {
    check_expression(key, text);
    const CoefficientExpr e = parse_coefficient_expr(text);
    if (e.uses(1))
        throw config_error("key " + key + ": variable x is not available here");
}

KeyHandler real_key(const std::string& name, double ExperimentSpec::* field) {
    return KeyHandler{
        [name, field](ExperimentSpec& s, const std::string& v) {
            s.*field = parse_real(name, v);
        },
        [field](const ExperimentSpec& s) { return format_double(s.*field); }};
}

// Builds the key table for one spec instance. Expression keys are validated
// at parse time so config errors carry the offending key.
std::map<std::string, KeyHandler> key_table() {
    std::map<std::string, KeyHandler> keys;

    keys["T"] = {[](ExperimentSpec& s, const std::string& v) {
                     s.T = parse_real("T", v);
                     if (!(s.T > 0.0)) throw config_error("key T: must be positive");
                 },
                 [](const ExperimentSpec& s) { return format_double(s.T); }};
    keys["N"] = {[](ExperimentSpec& s, const std::string& v) {
                     s.N = parse_long("N", v);
                     if (s.N < 1) throw config_error("key N: must be at least 1");
                 },
                 [](const ExperimentSpec& s) { return std::to_string(s.N); }};
    keys["levels"] = {[](ExperimentSpec& s, const std::string& v) {
                          s.levels = static_cast<int>(parse_long("levels", v));
                          if (s.levels < 1) throw config_error("key levels: must be at least 1");
                      },
                      [](const ExperimentSpec& s) { return std::to_string(s.levels); }};
    keys["seed"] = {[](ExperimentSpec& s, const std::string& v) {
                        const long parsed = parse_long("seed", v);
                        if (parsed < 0) throw config_error("key seed: must be nonnegative");
                        s.seed = static_cast<std::uint64_t>(parsed);
                    },
                    [](const ExperimentSpec& s) { return std::to_string(s.seed); }};
    keys["paths"] = {[](ExperimentSpec& s, const std::string& v) {
                         s.paths = parse_long("paths", v);
                         if (s.paths < 1) throw config_error("key paths: must be at least 1");
                     },
                     [](const ExperimentSpec& s) { return std::to_string(s.paths); }};
    keys["band.low_sq"] = {[](ExperimentSpec& s, const std::string& v) {
                               s.band_low_sq = parse_real("band.low_sq", v);
                               if (!(s.band_low_sq > 0.0))
                                   throw config_error("key band.low_sq: must be positive");
                           },
                           [](const ExperimentSpec& s) { return format_double(s.band_low_sq); }};
    keys["band.high_sq"] = {[](ExperimentSpec& s, const std::string& v) {
                                s.band_high_sq = parse_real("band.high_sq", v);
                                if (!(s.band_high_sq > 0.0))
                                    throw config_error("key band.high_sq: must be positive");
                            },
                            [](const ExperimentSpec& s) { return format_double(s.band_high_sq); }};
    keys["control"] = {[](ExperimentSpec& s, const std::string& v) { s.control = unquote(v); },
                       [](const ExperimentSpec& s) { return s.control; }};
    keys["family.constants"] = {
        [](ExperimentSpec& s, const std::string& v) {
            s.family_constants = static_cast<int>(parse_long("family.constants", v));
            if (s.family_constants < 1)
                throw config_error("key family.constants: must be at least 1");
        },
        [](const ExperimentSpec& s) { return std::to_string(s.family_constants); }};
    keys["family.bang_bang"] = {
        [](ExperimentSpec& s, const std::string& v) {
            s.family_bang_bang = parse_bool("family.bang_bang", v);
        },
        [](const ExperimentSpec& s) { return s.family_bang_bang ? "true" : "false"; }};
    keys["family.switch_intensity"] = {
        [](ExperimentSpec& s, const std::string& v) {
            s.family_switch_intensity = parse_real("family.switch_intensity", v);
            if (s.family_switch_intensity < 0.0)
                throw config_error("key family.switch_intensity: must be nonnegative");
        },
        [](const ExperimentSpec& s) { return format_double(s.family_switch_intensity); }};
    keys["tol"] = {[](ExperimentSpec& s, const std::string& v) {
                       s.tol = parse_real("tol", v);
                       if (!(s.tol > 0.0)) throw config_error("key tol: must be positive");
                   },
                   [](const ExperimentSpec& s) { return format_double(s.tol); }};
    keys["max_iter"] = {[](ExperimentSpec& s, const std::string& v) {
                            s.max_iter = static_cast<int>(parse_long("max_iter", v));
                            if (s.max_iter < 1)
                                throw config_error("key max_iter: must be at least 1");
                        },
                        [](const ExperimentSpec& s) { return std::to_string(s.max_iter); }};
    keys["p"] = {[](ExperimentSpec& s, const std::string& v) {
                     s.p = parse_real("p", v);
                     if (!(s.p >= 1.0)) throw config_error("key p: must be at least 1");
                 },
                 [](const ExperimentSpec& s) { return format_double(s.p); }};
    keys["payoff"] = {[](ExperimentSpec& s, const std::string& v) {
                          s.payoff = unquote(v);
                          check_payoff_expression("payoff", s.payoff);
                      },
                      [](const ExperimentSpec& s) { return '"' + s.payoff + '"'; }};
    keys["eta"] = {[](ExperimentSpec& s, const std::string& v) {
                       s.eta = unquote(v);
                       check_payoff_expression("eta", s.eta);
                   },
                   [](const ExperimentSpec& s) { return '"' + s.eta + '"'; }};
    keys["integrator"] = {[](ExperimentSpec& s, const std::string& v) {
                              s.integrator = unquote(v);
                              if (s.integrator != "db" && s.integrator != "dqv")
                                  throw config_error("key integrator: expected db or dqv");
                          },
                          [](const ExperimentSpec& s) { return s.integrator; }};
    keys["cp"] = {[](ExperimentSpec& s, const std::string& v) {
                      s.cp = parse_real("cp", v);
                      if (s.cp < 0.0) throw config_error("key cp: must be nonnegative");
                  },
                  [](const ExperimentSpec& s) { return format_double(s.cp); }};
    keys["phi"] = {[](ExperimentSpec& s, const std::string& v) {
                       s.phi = unquote(v);
                       static const std::set<std::string> allowed = {
                           "all", "quadratic", "cubic", "positive_part_cubed", "smooth_bump"};
                       if (!allowed.contains(s.phi))
                           throw config_error("key phi: unknown test-function tag '" + s.phi +
                                              "'");
                   },
                   [](const ExperimentSpec& s) { return s.phi; }};
    keys["deltas"] = {[](ExperimentSpec& s, const std::string& v) {
                          s.deltas = parse_real_list("deltas", v);
                          for (double d : s.deltas)
                              if (!(d > 0.0))
                                  throw config_error("key deltas: entries must be positive");
                      },
                      [](const ExperimentSpec& s) { return render_real_list(s.deltas); }};
    keys["stability.target"] = {
        [](ExperimentSpec& s, const std::string& v) {
            s.stability_target = unquote(v);
            if (s.stability_target != "x0" && s.stability_target != "obstacle")
                throw config_error("key stability.target: expected x0 or obstacle");
        },
        [](const ExperimentSpec& s) { return s.stability_target; }};
    keys["gheat.x0"] = real_key("gheat.x0", &ExperimentSpec::gheat_x0);
    keys["gheat.half_width"] = {
        [](ExperimentSpec& s, const std::string& v) {
            s.gheat_half_width = parse_real("gheat.half_width", v);
            if (!(s.gheat_half_width > 0.0))
                throw config_error("key gheat.half_width: must be positive");
        },
        [](const ExperimentSpec& s) { return format_double(s.gheat_half_width); }};
    keys["gheat.nx"] = {[](ExperimentSpec& s, const std::string& v) {
                            s.gheat_nx = parse_long("gheat.nx", v);
                            if (s.gheat_nx < 16)
                                throw config_error("key gheat.nx: must be at least 16");
                        },
                        [](const ExperimentSpec& s) { return std::to_string(s.gheat_nx); }};
    return keys;
}

// Problem block keys under a prefix ("" for the base problem, "p1."/"p2.").
void add_problem_keys(std::map<std::string, KeyHandler>& keys, const std::string& prefix,
                      ProblemConfig ExperimentSpec::* block) {
    auto real_field = [block](double ProblemConfig::* f, std::string key) {
        return [block, f, key](ExperimentSpec& s, const std::string& v) {
            (s.*block).*f = parse_real(key, v);
        };
    };
    auto real_out = [block](double ProblemConfig::* f) {
        return [block, f](const ExperimentSpec& s) { return format_double((s.*block).*f); };
    };
    auto expr_field = [block](std::string ProblemConfig::* f, std::string key) {
        return [block, f, key](ExperimentSpec& s, const std::string& v) {
            (s.*block).*f = unquote(v);
            check_expression(key, (s.*block).*f);
        };
    };
    auto expr_out = [block](std::string ProblemConfig::* f) {
        return [block, f](const ExperimentSpec& s) { return '"' + (s.*block).*f + '"'; };
    };

    keys[prefix + "x0"] = {real_field(&ProblemConfig::x0, prefix + "x0"),
                           real_out(&ProblemConfig::x0)};
    keys[prefix + "f"] = {expr_field(&ProblemConfig::f, prefix + "f"),
                          expr_out(&ProblemConfig::f)};
    keys[prefix + "f.lip"] = {real_field(&ProblemConfig::f_lip, prefix + "f.lip"),
                              real_out(&ProblemConfig::f_lip)};
    keys[prefix + "h"] = {expr_field(&ProblemConfig::h, prefix + "h"),
                          expr_out(&ProblemConfig::h)};
    keys[prefix + "h.lip"] = {real_field(&ProblemConfig::h_lip, prefix + "h.lip"),
                              real_out(&ProblemConfig::h_lip)};
    keys[prefix + "g"] = {expr_field(&ProblemConfig::g, prefix + "g"),
                          expr_out(&ProblemConfig::g)};
    keys[prefix + "g.lip"] = {real_field(&ProblemConfig::g_lip, prefix + "g.lip"),
                              real_out(&ProblemConfig::g_lip)};
    keys[prefix + "obstacle.s0"] = {real_field(&ProblemConfig::s0, prefix + "obstacle.s0"),
                                    real_out(&ProblemConfig::s0)};
    keys[prefix + "obstacle.f"] = {expr_field(&ProblemConfig::obstacle_f, prefix + "obstacle.f"),
                                   expr_out(&ProblemConfig::obstacle_f)};
    keys[prefix + "obstacle.f.lip"] = {
        real_field(&ProblemConfig::obstacle_f_lip, prefix + "obstacle.f.lip"),
        real_out(&ProblemConfig::obstacle_f_lip)};
    keys[prefix + "obstacle.h"] = {expr_field(&ProblemConfig::obstacle_h, prefix + "obstacle.h"),
                                   expr_out(&ProblemConfig::obstacle_h)};
    keys[prefix + "obstacle.h.lip"] = {
        real_field(&ProblemConfig::obstacle_h_lip, prefix + "obstacle.h.lip"),
        real_out(&ProblemConfig::obstacle_h_lip)};
    keys[prefix + "obstacle.g"] = {expr_field(&ProblemConfig::obstacle_g, prefix + "obstacle.g"),
                                   expr_out(&ProblemConfig::obstacle_g)};
    keys[prefix + "obstacle.g.lip"] = {
        real_field(&ProblemConfig::obstacle_g_lip, prefix + "obstacle.g.lip"),
        real_out(&ProblemConfig::obstacle_g_lip)};
}

std::vector<std::string> problem_key_names(const std::string& prefix) {
    static const char* suffixes[] = {"x0",         "f",          "f.lip",
                                     "h",          "h.lip",      "g",
                                     "g.lip",      "obstacle.s0", "obstacle.f",
                                     "obstacle.f.lip", "obstacle.h", "obstacle.h.lip",
                                     "obstacle.g", "obstacle.g.lip"};
    std::vector<std::string> out;
    for (const char* s : suffixes) out.push_back(prefix + s);
    return out;
}

// Keys each kind accepts, in canonical serialization order.
std::vector<std::string> applicable_keys(ExperimentKind kind) {
    std::vector<std::string> keys = {"T", "N", "seed"};
    auto append = [&keys](std::vector<std::string> more) {
        keys.insert(keys.end(), more.begin(), more.end());
    };
    const std::vector<std::string> band = {"band.low_sq", "band.high_sq"};
    const std::vector<std::string> family = {"family.constants", "family.bang_bang",
                                             "family.switch_intensity"};
    switch (kind) {
        case ExperimentKind::Simulate:
            append(band);
            append({"control"});
            append(problem_key_names(""));
            break;
        case ExperimentKind::Picard:
            append(band);
            append({"control"});
            append(problem_key_names(""));
            append({"tol", "max_iter"});
            break;
        case ExperimentKind::Expectation:
        case ExperimentKind::Capacity:
            append({"paths"});
            append(band);
            append(family);
            append({"payoff"});
            break;
        case ExperimentKind::CheckIto:
            append({"paths", "levels"});
            append(band);
            append({"control", "phi"});
            break;
        case ExperimentKind::CheckBdg:
            append({"paths"});
            append(band);
            append(family);
            append({"eta", "integrator", "p", "cp"});
            break;
        case ExperimentKind::CheckQv:
            append({"paths", "levels"});
            append(band);
            append({"control"});
            break;
        case ExperimentKind::Compare:
            append({"paths", "levels"});
            append(band);
            append({"control"});
            append(problem_key_names("p1."));
            append(problem_key_names("p2."));
            break;
        case ExperimentKind::Stability:
            append({"paths"});
            append(band);
            append({"control", "p", "deltas", "stability.target"});
            append(problem_key_names(""));
            break;
        case ExperimentKind::Gheat:
            keys = {"T"};
            append(band);
            append({"payoff", "gheat.x0", "gheat.half_width", "gheat.nx"});
            break;
        case ExperimentKind::Skorokhod:
            append(band);
            append({"control"});
            break;
    }
    return keys;
}

void cross_validate(const ExperimentSpec& spec) {
    if (!(spec.band_low_sq <= spec.band_high_sq))
        throw config_error("key band.low_sq: must not exceed band.high_sq");
    if (spec.kind == ExperimentKind::Stability && !(spec.p > 2.0))
        throw config_error("key p: stability requires p > 2");
    if (spec.kind == ExperimentKind::CheckBdg && spec.integrator == "db" && !(spec.p >= 2.0))
        throw config_error("key p: the db integrator requires p >= 2");
    if (spec.kind == ExperimentKind::Simulate || spec.kind == ExperimentKind::Picard ||
        spec.kind == ExperimentKind::Stability) {
        if (spec.problem.s0 > spec.problem.x0)
            throw config_error("key obstacle.s0: must not exceed x0");
    }
    if (spec.kind == ExperimentKind::Compare) {
        if (spec.problem.s0 > spec.problem.x0)
            throw config_error("key p1.obstacle.s0: must not exceed p1.x0");
        if (spec.problem2.s0 > spec.problem2.x0)
            throw config_error("key p2.obstacle.s0: must not exceed p2.x0");
        if (spec.problem.g != spec.problem2.g)
            throw config_error("key p2.g: compare requires a shared diffusion (p1.g == p2.g)");
    }
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
    for (const auto& [name, k] : kKinds)
        if (k == kind) return name;
    return "?";
}

std::optional<ExperimentKind> kind_from_name(const std::string& name) {
    const auto it = kKinds.find(name);
    if (it == kKinds.end()) return {};
    return it->second;
}

ExperimentSpec parse_config(const std::string& text, std::optional<ExperimentKind> cli_kind) {
    std::map<std::string, std::string> raw;
    std::optional<ExperimentKind> kind = cli_kind;

    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty()) throw config_error("line " + std::to_string(line_no) + ": missing key");
        if (raw.contains(key)) throw config_error("key " + key + ": set twice");
        raw[key] = value;
    }

    if (const auto it = raw.find("kind"); it != raw.end()) {
        const auto parsed = kind_from_name(it->second);
        if (!parsed) throw config_error("key kind: unknown experiment kind '" + it->second + "'");
        if (cli_kind && *parsed != *cli_kind)
            throw config_error("key kind: config says '" + it->second +
                               "' but the command line requested '" + kind_name(*cli_kind) + "'");
        kind = parsed;
        raw.erase(it);
    }
    if (!kind) throw config_error("key kind: missing (and no kind given on the command line)");

    ExperimentSpec spec;
    spec.kind = *kind;

    std::map<std::string, KeyHandler> table = key_table();
    add_problem_keys(table, "", &ExperimentSpec::problem);
    if (*kind == ExperimentKind::Compare) {
        add_problem_keys(table, "p1.", &ExperimentSpec::problem);
        add_problem_keys(table, "p2.", &ExperimentSpec::problem2);
    }

    const std::vector<std::string> allowed = applicable_keys(*kind);
    const std::set<std::string> allowed_set(allowed.begin(), allowed.end());
    for (const auto& [key, value] : raw) {
        if (!allowed_set.contains(key))
            throw config_error("key " + key + ": unknown key for kind '" + kind_name(*kind) +
                               "'");
        table.at(key).set(spec, value);
    }
    cross_validate(spec);
    return spec;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentSpec& spec) {
    std::map<std::string, KeyHandler> table = key_table();
    add_problem_keys(table, "", &ExperimentSpec::problem);
    if (spec.kind == ExperimentKind::Compare) {
        add_problem_keys(table, "p1.", &ExperimentSpec::problem);
        add_problem_keys(table, "p2.", &ExperimentSpec::problem2);
    }
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("kind", kind_name(spec.kind));
    for (const std::string& key : applicable_keys(spec.kind))
        out.emplace_back(key, table.at(key).get(spec));
    return out;
}

std::string serialize(const ExperimentSpec& spec) {
    std::string out;
    for (const auto& [key, value] : to_key_values(spec)) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

}  // namespace greflect
