#include "greflect/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "greflect/expr.hpp"
#include "greflect/gexpect.hpp"
#include "greflect/ito_check.hpp"
#include "greflect/parallel.hpp"
#include "greflect/skorokhod.hpp"

namespace greflect {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_real(const std::string& context, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error(context + ": not a real number ('" + s + "')");
    }
}

class OutputTracker {
  public:
    explicit OutputTracker(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }
    std::filesystem::path file(const std::string& name) {
        written_.push_back(dir_ / name);
        return written_.back();
    }
    void discard() {
        std::error_code ec;
        for (const auto& f : written_) std::filesystem::remove(f, ec);
    }

  private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

VolatilityBand band_of(const ExperimentSpec& spec) {
    return VolatilityBand{spec.band_low_sq, spec.band_high_sq};
}

std::vector<VolatilityControl> family_of(const ExperimentSpec& spec) {
    FamilySpec fam;
    fam.n_constants = spec.family_constants;
    fam.include_bang_bang = spec.family_bang_bang;
    fam.switch_intensity = spec.family_switch_intensity;
    fam.band = band_of(spec);
    return build_family(fam);
}

Coefficient coefficient_from(const std::string& text, double lip) {
    return parse_coefficient_expr(text, lip).to_coefficient();
}

PathPayoff terminal_payoff(const std::string& text) {
    const CoefficientExpr e = parse_coefficient_expr(text);
    return [e](const GScenario& sc) {
        const Eigen::Index last = sc.grid.size() - 1;
        return e.eval(sc.grid.t(last), 0.0, sc.b(last), sc.qv(last));
    };
}

InstantFunctional instant_functional(const std::string& text) {
    const CoefficientExpr e = parse_coefficient_expr(text);
    return [e](const GScenario& sc, Eigen::Index k) {
        return e.eval(sc.grid.t(k), 0.0, sc.b(k), sc.qv(k));
    };
}

void write_manifest(const ExperimentSpec& spec, OutputTracker& out) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["kind"] = kind_name(spec.kind);
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [key, value] : to_key_values(spec)) cfg[key] = value;
    j["config"] = cfg;
    std::ofstream f(out.file("manifest.json"));
    f << j.dump(2) << '\n';
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot open for writing: " + file.string());
    f << text;
}

// --- per-kind runners ---

void run_simulate(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const GScenario scenario = simulate_scenario(control, grid, spec.seed, 0);
    const RgsdeProblem problem = problem_from_config(spec.problem);
    problem.validate(spec.T);
    const RgsdeSolution sol = euler_reflected(problem, scenario);
    write_scenario_csv(scenario, out.file("scenario.csv"));
    write_solution_csv(sol, out.file("paths.csv"));
}

void run_skorokhod(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const GScenario scenario = simulate_scenario(control, grid, spec.seed, 0);
    const ReflectedPair pair = reflected_gbm(scenario);
    write_scenario_csv(scenario, out.file("scenario.csv"));
    write_reflected_csv(pair, out.file("reflected.csv"));
}

void run_picard(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const GScenario scenario = simulate_scenario(control, grid, spec.seed, 0);
    const RgsdeProblem problem = problem_from_config(spec.problem);
    problem.validate(spec.T);
    const PicardResult result = picard_solve(problem, scenario, spec.tol, spec.max_iter);
    if (!result.converged) {
        std::string trace;
        for (double d : result.distances) trace += " " + format_double(d);
        throw numeric_error("picard iteration did not converge within " +
                            std::to_string(spec.max_iter) + " iterations; distance trace:" +
                            trace);
    }
    write_solution_csv(result.solution, out.file("paths.csv"));
    std::string csv = "iter,distance\n";
    for (std::size_t i = 0; i < result.distances.size(); ++i)
        csv += std::to_string(i + 1) + "," + format_double(result.distances[i]) + "\n";
    write_text(out.file("iterations.csv"), csv);
}

void run_expectation(const ExperimentSpec& spec, OutputTracker& out) {
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const EstimateRecord record =
        upper_expectation(terminal_payoff(spec.payoff), family_of(spec), grid, spec.paths,
                          spec.seed);
    nlohmann::json j = nlohmann::json::parse(record.to_json());
    const CoefficientExpr e = parse_coefficient_expr(spec.payoff);
    if ((e.variable_mask() & ~(1u << 2)) == 0) {
        // Terminal payoff of B_T alone: report the PDE oracle next to the
        // finite-family sup so the family's under-approximation is visible.
        const auto phi = [&e](double v) { return e.eval(0.0, 0.0, v, 0.0); };
        const double hw = 6.0 * std::sqrt(spec.band_high_sq * spec.T);
        const PdeSolution pde = gheat_solve(phi, band_of(spec), spec.T, 0.0, hw, 600);
        j["pde_upper"] = pde.u_at(0.0);
    }
    write_text(out.file("estimate.json"), j.dump(2) + "\n");
}

void run_capacity(const ExperimentSpec& spec, OutputTracker& out) {
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const CoefficientExpr e = parse_coefficient_expr(spec.payoff);
    const PathPayoff indicator = [e](const GScenario& sc) {
        const Eigen::Index last = sc.grid.size() - 1;
        return e.eval(sc.grid.t(last), 0.0, sc.b(last), sc.qv(last)) > 0.0 ? 1.0 : 0.0;
    };
    const EstimateRecord record =
        upper_expectation(indicator, family_of(spec), grid, spec.paths, spec.seed);
    write_text(out.file("capacity.json"), record.to_json() + "\n");
}

void run_check_qv(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    std::string csv = "level,n_steps,mesh,rms_limit_part,max_exact_part\n";
    for (int level = 0; level < spec.levels; ++level) {
        const long n_steps = spec.N << level;
        const TimeGrid grid = make_grid(spec.T, n_steps);
        const auto n = static_cast<std::size_t>(spec.paths);
        std::vector<double> limit(n), exact(n);
        parallel_for(n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const GScenario sc = simulate_scenario(control, grid, spec.seed, i);
                const QvIdentityResidual r = qv_identity_residual(sc);
                limit[i] = r.limit_part;
                exact[i] = std::abs(r.exact_part);
            }
        });
        double sq = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sq += limit[i] * limit[i];
            worst = std::max(worst, exact[i]);
        }
        csv += std::to_string(level) + "," + std::to_string(n_steps) + "," +
               format_double(mesh(grid)) + "," +
               format_double(std::sqrt(sq / static_cast<double>(n))) + "," +
               format_double(worst) + "\n";
    }
    write_text(out.file("qv_study.csv"), csv);
}

void run_check_ito(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    std::vector<std::string> tags;
    if (spec.phi == "all")
        tags = {"quadratic", "cubic", "positive_part_cubed"};
    else
        tags = {spec.phi};

    RgsdeProblem reflected_bm;
    reflected_bm.g = Coefficient::constant(1.0);

    std::string csv = "phi,mesh,median_residual,p90_residual,n_paths\n";
    for (const std::string& tag : tags) {
        const TestFunction phi = make_test_function(tag);
        for (int level = 0; level < spec.levels; ++level) {
            const long n_steps = spec.N << level;
            const TimeGrid grid = make_grid(spec.T, n_steps);
            const auto n = static_cast<std::size_t>(spec.paths);
            std::vector<double> residuals(n);
            parallel_for(n, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const GScenario sc = simulate_scenario(control, grid, spec.seed, i);
                    const RgsdeSolution sol = euler_reflected(reflected_bm, sc);
                    residuals[i] = ito_residual(phi, sol, reflected_bm, sc);
                }
            });
            std::sort(residuals.begin(), residuals.end());
            const double median = residuals[n / 2];
            const double p90 = residuals[static_cast<std::size_t>(0.9 * static_cast<double>(n))];
            csv += tag + "," + format_double(mesh(grid)) + "," + format_double(median) + "," +
                   format_double(p90) + "," + std::to_string(spec.paths) + "\n";
        }
    }
    write_text(out.file("ito_study.csv"), csv);
}

void run_check_bdg(const ExperimentSpec& spec, OutputTracker& out) {
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const BdgReport report =
        bdg_check(instant_functional(spec.eta), spec.p,
                  spec.integrator == "db" ? Integrator::DB : Integrator::DQV, family_of(spec),
                  grid, spec.paths, spec.seed, spec.cp > 0.0 ? spec.cp : -1.0);
    write_text(out.file("bdg.json"), report.to_json() + "\n");
}

void run_compare(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    const RgsdeProblem p1 = problem_from_config(spec.problem);
    const RgsdeProblem p2 = problem_from_config(spec.problem2);
    p1.validate(spec.T);
    p2.validate(spec.T);
    std::string csv = "level,n_steps,mesh,mean_max_violation,max_max_violation\n";
    for (int level = 0; level < spec.levels; ++level) {
        const long n_steps = spec.N << level;
        const TimeGrid grid = make_grid(spec.T, n_steps);
        const auto n = static_cast<std::size_t>(spec.paths);
        std::vector<double> violations(n);
        parallel_for(n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const GScenario sc = simulate_scenario(control, grid, spec.seed, i);
                violations[i] = comparison_violation(p1, p2, sc);
            }
        });
        double acc = 0.0, worst = 0.0;
        for (double v : violations) {
            acc += v;
            worst = std::max(worst, v);
        }
        csv += std::to_string(level) + "," + std::to_string(n_steps) + "," +
               format_double(mesh(grid)) + "," +
               format_double(acc / static_cast<double>(n)) + "," + format_double(worst) + "\n";
    }
    write_text(out.file("comparison.csv"), csv);
}

void run_stability(const ExperimentSpec& spec, OutputTracker& out) {
    const VolatilityControl control = control_from_string(spec.control, band_of(spec));
    const TimeGrid grid = make_grid(spec.T, spec.N);
    const RgsdeProblem base = problem_from_config(spec.problem);
    base.validate(spec.T);
    std::string csv = "delta,gap,gap_root\n";
    for (double delta : spec.deltas) {
        ProblemConfig perturbed_cfg = spec.problem;
        if (spec.stability_target == "x0")
            perturbed_cfg.x0 += delta;
        else
            perturbed_cfg.s0 += delta;
        const RgsdeProblem perturbed = problem_from_config(perturbed_cfg);
        const auto n = static_cast<std::size_t>(spec.paths);
        std::vector<double> sups(n);
        parallel_for(n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const GScenario sc = simulate_scenario(control, grid, spec.seed, i);
                const RgsdeSolution s1 = euler_reflected(base, sc);
                const RgsdeSolution s2 = euler_reflected(perturbed, sc);
                sups[i] = (s1.x_path.values - s2.x_path.values).abs().maxCoeff();
            }
        });
        double acc = 0.0;
        for (double s : sups) acc += std::pow(s, spec.p);
        const double gap = acc / static_cast<double>(n);
        csv += format_double(delta) + "," + format_double(gap) + "," +
               format_double(std::pow(gap, 1.0 / spec.p)) + "\n";
    }
    write_text(out.file("stability.csv"), csv);
}

void run_gheat(const ExperimentSpec& spec, OutputTracker& out) {
    const CoefficientExpr e = parse_coefficient_expr(spec.payoff);
    if ((e.variable_mask() & ~(1u << 2)) != 0)
        throw config_error("key payoff: gheat payoffs may reference the variable b only");
    const auto phi = [&e](double v) { return e.eval(0.0, 0.0, v, 0.0); };
    const PdeSolution pde = gheat_solve(phi, band_of(spec), spec.T, spec.gheat_x0,
                                        spec.gheat_half_width, spec.gheat_nx);
    write_pde_csv(pde, out.file("pde.csv"));
    nlohmann::json j;
    j["u_at_x0"] = pde.u_at(spec.gheat_x0);
    j["dt"] = pde.dt;
    j["dx"] = pde.dx;
    write_text(out.file("gheat.json"), j.dump(2) + "\n");
}

}  // namespace

VolatilityControl control_from_string(const std::string& text, const VolatilityBand& band) {
    const std::vector<std::string> parts = split(text, ':');
    if (parts.empty()) throw config_error("key control: empty control description");
    try {
        if (parts[0] == "constant") {
            if (parts.size() != 2) throw config_error("key control: constant:<sigma_sq>");
            return VolatilityControl::constant(to_real("key control", parts[1]), band);
        }
        if (parts[0] == "piecewise") {
            if (parts.size() != 3)
                throw config_error("key control: piecewise:<t1|t2|..>:<v0|v1|..>");
            std::vector<double> breaks, values;
            for (const std::string& s : split(parts[1], '|'))
                breaks.push_back(to_real("key control", s));
            for (const std::string& s : split(parts[2], '|'))
                values.push_back(to_real("key control", s));
            return VolatilityControl::piecewise_constant(std::move(breaks), std::move(values),
                                                         band);
        }
        if (parts[0] == "bang_bang") {
            if (parts.size() != 3 || (parts[1] != "gt" && parts[1] != "le"))
                throw config_error("key control: bang_bang:<gt|le>:<threshold>");
            return VolatilityControl::bang_bang(to_real("key control", parts[2]),
                                                parts[1] == "gt", band);
        }
        if (parts[0] == "random_switch") {
            if (parts.size() < 2 || parts.size() > 3)
                throw config_error("key control: random_switch:<intensity>[:<stream>]");
            const double intensity = to_real("key control", parts[1]);
            const std::uint64_t stream =
                parts.size() == 3
                    ? static_cast<std::uint64_t>(to_real("key control", parts[2]))
                    : 1;
            return VolatilityControl::random_switch(intensity, stream, band);
        }
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("key control: ") + e.what());
    }
    throw config_error("key control: unknown control kind '" + parts[0] + "'");
}

RgsdeProblem problem_from_config(const ProblemConfig& cfg) {
    RgsdeProblem p;
    p.x0 = cfg.x0;
    p.f = coefficient_from(cfg.f, cfg.f_lip);
    p.h = coefficient_from(cfg.h, cfg.h_lip);
    p.g = coefficient_from(cfg.g, cfg.g_lip);
    p.obstacle.s0 = cfg.s0;
    p.obstacle.f = coefficient_from(cfg.obstacle_f, cfg.obstacle_f_lip);
    p.obstacle.h = coefficient_from(cfg.obstacle_h, cfg.obstacle_h_lip);
    p.obstacle.g = coefficient_from(cfg.obstacle_g, cfg.obstacle_g_lip);
    return p;
}

void run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    OutputTracker out(out_dir);
    try {
        switch (spec.kind) {
            case ExperimentKind::Simulate: run_simulate(spec, out); break;
            case ExperimentKind::Skorokhod: run_skorokhod(spec, out); break;
            case ExperimentKind::Picard: run_picard(spec, out); break;
            case ExperimentKind::Expectation: run_expectation(spec, out); break;
            case ExperimentKind::Capacity: run_capacity(spec, out); break;
            case ExperimentKind::CheckQv: run_check_qv(spec, out); break;
            case ExperimentKind::CheckIto: run_check_ito(spec, out); break;
            case ExperimentKind::CheckBdg: run_check_bdg(spec, out); break;
            case ExperimentKind::Compare: run_compare(spec, out); break;
            case ExperimentKind::Stability: run_stability(spec, out); break;
            case ExperimentKind::Gheat: run_gheat(spec, out); break;
        }
        write_manifest(spec, out);
    } catch (...) {
        out.discard();
        throw;
    }
}

}  // namespace greflect
