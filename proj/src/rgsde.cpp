#include "greflect/rgsde.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace greflect {

Coefficient Coefficient::constant(double v) {
    return Coefficient{[v](double, double, double, double) { return v; }, 0.0,
                       format_double(v)};
}

Coefficient Coefficient::make(std::function<double(double, double, double, double)> fn,
                              double lipschitz_bound, std::string label) {
    return Coefficient{std::move(fn), lipschitz_bound, std::move(label)};
}

LipschitzAudit audit_lipschitz(const Coefficient& c, double horizon, double x_lo,
                               double x_hi, int n_probes) {
    LipschitzAudit audit;
    const double dx = (x_hi - x_lo) / static_cast<double>(n_probes - 1);
    const double ts[] = {0.0, 0.5 * horizon, horizon};
    const double bs[] = {-1.0, 0.0, 1.0};
    for (double t : ts) {
        for (double b : bs) {
            const double qv = 0.5 * t;
            double prev = c(t, x_lo, b, qv);
            for (int i = 1; i < n_probes; ++i) {
                const double x = x_lo + dx * static_cast<double>(i);
                const double cur = c(t, x, b, qv);
                const double slope = std::abs(cur - prev) / dx;
                if (slope > audit.max_slope) audit.max_slope = slope;
                prev = cur;
            }
        }
    }
    audit.ok = audit.max_slope <= c.lipschitz_bound * 1.05;
    return audit;
}

ObstacleSpec ObstacleSpec::constant(double level) {
    ObstacleSpec s;
    s.s0 = level;
    return s;
}

void RgsdeProblem::validate(double horizon) const {
    if (obstacle.s0 > x0)
        throw std::invalid_argument("RgsdeProblem: obstacle must start at or below x0");
    const Coefficient* coefs[] = {&f, &h, &g, &obstacle.f, &obstacle.h, &obstacle.g};
    const char* names[] = {"f", "h", "g", "obstacle.f", "obstacle.h", "obstacle.g"};
    for (int i = 0; i < 6; ++i) {
        const LipschitzAudit audit = audit_lipschitz(*coefs[i], horizon);
        if (!audit.ok) {
            std::cerr << "warning: coefficient " << names[i] << " (" << coefs[i]->label
                      << ") sampled slope " << audit.max_slope
                      << " exceeds declared Lipschitz bound " << coefs[i]->lipschitz_bound
                      << "\n";
        }
    }
}

namespace {

double eval_checked(const Coefficient& c, const char* name, double t, double x, double b,
                    double qv) {
    const double v = c(t, x, b, qv);
    if (!std::isfinite(v)) {
        throw numeric_error(std::string("coefficient ") + name + " (" + c.label +
                            ") returned a non-finite value at t=" + format_double(t) +
                            ", x=" + format_double(x));
    }
    return v;
}

RgsdeDiagnostics make_diagnostics(const RgsdeSolution& sol) {
    ReflectedPair pair{sol.x_path, sol.k_path};
    RgsdeDiagnostics d;
    d.flat_off_right = flat_off_residual(pair, sol.s_path, EndpointRule::Right);
    d.flat_off_left = flat_off_residual(pair, sol.s_path, EndpointRule::Left);
    d.k_representation = k_representation_residual(sol, sol.s_path);
    return d;
}

}  // namespace

SamplePath simulate_obstacle(const ObstacleSpec& spec, const GScenario& scenario) {
    const Eigen::Index n = scenario.grid.size();
    Eigen::ArrayXd s(n);
    s(0) = spec.s0;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double t = scenario.grid.t(k);
        const double fv = eval_checked(spec.f, "obstacle.f", t, s(k), scenario.b(k), scenario.qv(k));
        const double hv = eval_checked(spec.h, "obstacle.h", t, s(k), scenario.b(k), scenario.qv(k));
        const double gv = eval_checked(spec.g, "obstacle.g", t, s(k), scenario.b(k), scenario.qv(k));
        s(k + 1) = ((s(k) + fv * scenario.grid.dt(k)) + hv * scenario.dqv(k)) + gv * scenario.db(k);
    }
    return SamplePath(scenario.grid, std::move(s));
}

RgsdeSolution euler_reflected(const RgsdeProblem& problem, const GScenario& scenario) {
    if (problem.obstacle.s0 > problem.x0)
        throw std::invalid_argument("euler_reflected: obstacle must start at or below x0");
    SamplePath s = simulate_obstacle(problem.obstacle, scenario);
    const Eigen::Index n = scenario.grid.size();
    Eigen::ArrayXd x(n), k(n), y(n);
    double pusher = 0.0;
    y(0) = problem.x0;
    x(0) = detail::reflect_update(y(0), s.values(0), pusher);
    k(0) = pusher;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double t = scenario.grid.t(j);
        const double fv = eval_checked(problem.f, "f", t, x(j), scenario.b(j), scenario.qv(j));
        const double hv = eval_checked(problem.h, "h", t, x(j), scenario.b(j), scenario.qv(j));
        const double gv = eval_checked(problem.g, "g", t, x(j), scenario.b(j), scenario.qv(j));
        y(j + 1) = ((y(j) + fv * scenario.grid.dt(j)) + hv * scenario.dqv(j)) + gv * scenario.db(j);
        x(j + 1) = detail::reflect_update(y(j + 1), s.values(j + 1), pusher);
        k(j + 1) = pusher;
    }
    RgsdeSolution sol;
    sol.x_path = SamplePath(scenario.grid, std::move(x));
    sol.k_path = IncreasingPath(SamplePath(scenario.grid, std::move(k)));
    sol.y_path = SamplePath(scenario.grid, std::move(y));
    sol.s_path = std::move(s);
    sol.diagnostics = make_diagnostics(sol);
    return sol;
}

double k_representation_residual(const RgsdeSolution& sol, const SamplePath& obstacle_path) {
    const Eigen::ArrayXd& y = sol.y_path.values;
    const Eigen::ArrayXd& s = obstacle_path.values;
    const Eigen::ArrayXd& k = sol.k_path.values();
    double running = 0.0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double d = detail::neg_part(y(i), s(i));
        if (d > running) running = d;
        worst = std::max(worst, std::abs(k(i) - running));
    }
    return worst;
}

PicardResult picard_solve(const RgsdeProblem& problem, const GScenario& scenario, double tol,
                          int max_iter, const std::optional<SamplePath>& initial_iterate) {
    if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");
    if (problem.obstacle.s0 > problem.x0)
        throw std::invalid_argument("picard_solve: obstacle must start at or below x0");

    SamplePath s = simulate_obstacle(problem.obstacle, scenario);
    const Eigen::Index n = scenario.grid.size();

    Eigen::ArrayXd x_prev = initial_iterate
                                ? initial_iterate->values
                                : Eigen::ArrayXd::Constant(n, problem.x0);
    if (x_prev.size() != n)
        throw std::invalid_argument("picard_solve: initial iterate size mismatch");

    PicardResult result;
    Eigen::ArrayXd y(n), x(n), k(n);
    for (int it = 0; it < max_iter; ++it) {
        y(0) = problem.x0;
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            const double t = scenario.grid.t(j);
            const double fv = eval_checked(problem.f, "f", t, x_prev(j), scenario.b(j), scenario.qv(j));
            const double hv = eval_checked(problem.h, "h", t, x_prev(j), scenario.b(j), scenario.qv(j));
            const double gv = eval_checked(problem.g, "g", t, x_prev(j), scenario.b(j), scenario.qv(j));
            y(j + 1) = ((y(j) + fv * scenario.grid.dt(j)) + hv * scenario.dqv(j)) +
                       gv * scenario.db(j);
        }
        double pusher = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i) = detail::reflect_update(y(i), s.values(i), pusher);
            k(i) = pusher;
        }
        const double dist = (x - x_prev).abs().maxCoeff();
        result.distances.push_back(dist);
        result.iterations = it + 1;
        x_prev = x;
        if (dist < tol) {
            result.converged = true;
            break;
        }
    }

    RgsdeSolution sol;
    sol.x_path = SamplePath(scenario.grid, std::move(x));
    sol.k_path = IncreasingPath(SamplePath(scenario.grid, std::move(k)));
    sol.y_path = SamplePath(scenario.grid, std::move(y));
    sol.s_path = std::move(s);
    sol.diagnostics = make_diagnostics(sol);
    result.solution = std::move(sol);
    return result;
}

double comparison_violation(const RgsdeProblem& p1, const RgsdeProblem& p2,
                            const GScenario& scenario) {
    if (p1.g.label != p2.g.label)
        throw std::invalid_argument("comparison_violation: diffusion coefficients must match "
                                    "(labels '" + p1.g.label + "' vs '" + p2.g.label + "')");
    const RgsdeSolution s1 = euler_reflected(p1, scenario);
    const RgsdeSolution s2 = euler_reflected(p2, scenario);
    return (s1.x_path.values - s2.x_path.values).max(0.0).maxCoeff();
}

double stability_gap(const RgsdeProblem& p1, const RgsdeProblem& p2,
                     std::span<const GScenario> scenarios, double p) {
    if (!(p > 2.0)) throw std::invalid_argument("stability_gap: moment order p must exceed 2");
    if (scenarios.empty()) throw std::invalid_argument("stability_gap: empty ensemble");
    double acc = 0.0;
    for (const GScenario& sc : scenarios) {
        const RgsdeSolution s1 = euler_reflected(p1, sc);
        const RgsdeSolution s2 = euler_reflected(p2, sc);
        const double sup = (s1.x_path.values - s2.x_path.values).abs().maxCoeff();
        acc += std::pow(sup, p);
    }
    return acc / static_cast<double>(scenarios.size());
}

void write_solution_csv(const RgsdeSolution& sol, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
    out << "t,x,k,y,s\n";
    for (Eigen::Index i = 0; i < sol.x_path.size(); ++i) {
        out << format_double(sol.x_path.grid.t(i)) << ',' << format_double(sol.x_path.values(i))
            << ',' << format_double(sol.k_path.values()(i)) << ','
            << format_double(sol.y_path.values(i)) << ',' << format_double(sol.s_path.values(i))
            << '\n';
    }
}

}  // namespace greflect
