#include "greflect/gexpect.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "greflect/parallel.hpp"
#include "greflect/rgsde.hpp"

namespace greflect {

namespace {

constexpr std::size_t kChunk = 256;

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) {
        const double d = x - mean;
        acc += d * d;
    }
    const auto n = static_cast<double>(v.size());
    return std::sqrt(acc / (n * (n - 1.0)));
}

void finalize_record(EstimateRecord& record) {
    record.upper = record.per_control.front().mean;
    record.lower = record.per_control.front().mean;
    record.argmax = record.per_control.front().label;
    for (const ControlEstimate& ce : record.per_control) {
        if (ce.mean > record.upper) {
            record.upper = ce.mean;
            record.argmax = ce.label;
        }
        if (ce.mean < record.lower) record.lower = ce.mean;
    }
}

/// Trapezoid integral over the grid of the per-instant family sup of the
/// per-control means of |eta|^p. Returns the integral (not time-averaged).
double integral_of_upper_moments(const InstantFunctional& eta, double p,
                                 const std::vector<VolatilityControl>& family,
                                 const TimeGrid& grid, long n_paths, std::uint64_t seed) {
    const Eigen::Index m = grid.size();
    const auto n = static_cast<std::size_t>(n_paths);
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    Eigen::ArrayXd sup_means = Eigen::ArrayXd::Constant(m, -1e308);
    for (const VolatilityControl& control : family) {
        std::vector<Eigen::ArrayXd> partial(n_chunks, Eigen::ArrayXd::Zero(m));
        parallel_for(
            n,
            [&](std::size_t lo, std::size_t hi) {
                Eigen::ArrayXd& acc = partial[lo / kChunk];
                for (std::size_t i = lo; i < hi; ++i) {
                    const GScenario sc = simulate_scenario(control, grid, seed, i);
                    for (Eigen::Index k = 0; k < m; ++k)
                        acc(k) += std::pow(std::abs(eta(sc, k)), p);
                }
            },
            kChunk);
        Eigen::ArrayXd sums = Eigen::ArrayXd::Zero(m);
        for (const Eigen::ArrayXd& acc : partial) sums += acc;
        sup_means = sup_means.max(sums / static_cast<double>(n_paths));
    }
    double integral = 0.0;
    for (Eigen::Index k = 0; k + 1 < m; ++k)
        integral += 0.5 * (sup_means(k) + sup_means(k + 1)) * grid.dt(k);
    return integral;
}

}  // namespace

std::string EstimateRecord::to_json() const {
    nlohmann::json j;
    j["per_control"] = nlohmann::json::array();
    for (const ControlEstimate& ce : per_control)
        j["per_control"].push_back(
            {{"label", ce.label}, {"mean", ce.mean}, {"se", ce.se}, {"n", ce.n}});
    j["upper"] = upper;
    j["lower"] = lower;
    j["argmax"] = argmax;
    return j.dump(2);
}

std::vector<EstimateRecord> upper_expectation_multi(
    std::span<const PathPayoff> payoffs, const std::vector<VolatilityControl>& family,
    const TimeGrid& grid, long n_paths, std::uint64_t seed) {
    if (family.empty()) throw std::invalid_argument("upper_expectation: empty control family");
    if (n_paths < 2) throw std::invalid_argument("upper_expectation: need at least two paths");
    if (payoffs.empty()) throw std::invalid_argument("upper_expectation: no payoffs");

    const auto n = static_cast<std::size_t>(n_paths);
    std::vector<EstimateRecord> records(payoffs.size());
    std::vector<std::vector<double>> values(payoffs.size(), std::vector<double>(n));

    for (const VolatilityControl& control : family) {
        parallel_for(
            n,
            [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const GScenario sc = simulate_scenario(control, grid, seed, i);
                    for (std::size_t q = 0; q < payoffs.size(); ++q) {
                        const double v = payoffs[q](sc);
                        if (!std::isfinite(v))
                            throw numeric_error("payoff returned a non-finite value (path " +
                                                std::to_string(i) + ", control " +
                                                control.label() + ")");
                        values[q][i] = v;
                    }
                }
            },
            kChunk);
        for (std::size_t q = 0; q < payoffs.size(); ++q) {
            ControlEstimate ce;
            ce.label = control.label();
            ce.n = n_paths;
            ce.mean = mean_of(values[q]);
            ce.se = standard_error(values[q], ce.mean);
            records[q].per_control.push_back(std::move(ce));
        }
    }
    for (EstimateRecord& r : records) finalize_record(r);
    return records;
}

EstimateRecord upper_expectation(const PathPayoff& payoff,
                                 const std::vector<VolatilityControl>& family,
                                 const TimeGrid& grid, long n_paths, std::uint64_t seed) {
    const PathPayoff payoffs[] = {payoff};
    return upper_expectation_multi(payoffs, family, grid, n_paths, seed).front();
}

double capacity(const PathEvent& event, const std::vector<VolatilityControl>& family,
                const TimeGrid& grid, long n_paths, std::uint64_t seed) {
    const PathPayoff indicator = [&event](const GScenario& sc) {
        return event(sc) ? 1.0 : 0.0;
    };
    const PathPayoff payoffs[] = {indicator};
    return upper_expectation_multi(payoffs, family, grid, n_paths, seed).front().upper;
}

double mg_norm(const InstantFunctional& eta, double p,
               const std::vector<VolatilityControl>& family, const TimeGrid& grid,
               long n_paths, std::uint64_t seed) {
    if (!(p >= 1.0)) throw std::invalid_argument("mg_norm: order p must be >= 1");
    if (family.empty()) throw std::invalid_argument("mg_norm: empty control family");
    const double integral = integral_of_upper_moments(eta, p, family, grid, n_paths, seed);
    return std::pow(integral / grid.horizon(), 1.0 / p);
}

double default_bdg_constant(double p) {
    if (p == 2.0) return 4.0;
    return std::pow(p / (p - 1.0), p) * std::pow(p, 0.5 * p);
}

std::string BdgReport::to_json() const {
    nlohmann::json j;
    j["p"] = p;
    j["integrator"] = integrator == Integrator::DB ? "db" : "dqv";
    j["c_p"] = c_p;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["ratio"] = ratio;
    j["n_paths"] = n_paths;
    return j.dump(2);
}

BdgReport bdg_check(const InstantFunctional& eta, double p, Integrator integrator,
                    const std::vector<VolatilityControl>& family, const TimeGrid& grid,
                    long n_paths, std::uint64_t seed, double c_p) {
    if (integrator == Integrator::DB && !(p >= 2.0))
        throw std::invalid_argument("bdg_check: dB integrator requires p >= 2");
    if (integrator == Integrator::DQV && !(p >= 1.0))
        throw std::invalid_argument("bdg_check: d<B> integrator requires p >= 1");
    if (family.empty()) throw std::invalid_argument("bdg_check: empty control family");
    if (n_paths < 2) throw std::invalid_argument("bdg_check: need at least two paths");

    BdgReport report;
    report.p = p;
    report.integrator = integrator;
    report.c_p = integrator == Integrator::DB ? (c_p > 0.0 ? c_p : default_bdg_constant(p)) : 1.0;
    report.n_paths = n_paths;

    const auto n = static_cast<std::size_t>(n_paths);
    std::vector<double> sups(n);
    double lhs = 0.0;
    for (const VolatilityControl& control : family) {
        parallel_for(
            n,
            [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const GScenario sc = simulate_scenario(control, grid, seed, i);
                    double integral = 0.0;
                    double sup = 0.0;  // |integral at u=0| = 0
                    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
                        const double di = integrator == Integrator::DB ? sc.db(k) : sc.dqv(k);
                        integral += eta(sc, k) * di;
                        const double a = std::abs(integral);
                        if (a > sup) sup = a;
                    }
                    sups[i] = std::pow(sup, p);
                }
            },
            kChunk);
        lhs = std::max(lhs, mean_of(sups));
    }
    report.lhs = lhs;

    const double integral = integral_of_upper_moments(eta, p, family, grid, n_paths, seed);
    const double T = grid.horizon();
    report.rhs = integrator == Integrator::DQV
                     ? std::pow(T, p - 1.0) * integral
                     : report.c_p * std::pow(T, 0.5 * p - 1.0) * integral;
    report.ratio = report.lhs == 0.0 ? 0.0 : report.lhs / report.rhs;
    return report;
}

double PdeSolution::u_at(double x_query) const {
    Eigen::Index best = 0;
    double best_d = std::abs(x(0) - x_query);
    for (Eigen::Index i = 1; i < x.size(); ++i) {
        const double d = std::abs(x(i) - x_query);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return u(best);
}

PdeSolution gheat_solve(const std::function<double(double)>& payoff,
                        const VolatilityBand& band, double T, double x0,
                        double half_width, Eigen::Index nx) {
    band.validate();
    if (nx < 16) throw std::invalid_argument("gheat_solve: need at least 16 space intervals");
    if (!(half_width > 0.0)) throw std::invalid_argument("gheat_solve: half_width must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("gheat_solve: horizon must be positive");

    PdeSolution pde;
    pde.band = band;
    const Eigen::Index m = nx + 1;
    pde.dx = 2.0 * half_width / static_cast<double>(nx);
    pde.x = Eigen::ArrayXd::LinSpaced(m, x0 - half_width, x0 + half_width);
    pde.u.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        pde.u(i) = payoff(pde.x(i));
        if (!std::isfinite(pde.u(i)))
            throw std::invalid_argument("gheat_solve: payoff is not finite on the domain");
    }

    const double dt_cfl = 0.9 * pde.dx * pde.dx / (2.0 * band.sigma_high_sq);
    const auto n_steps = static_cast<long>(std::ceil(T / dt_cfl));
    pde.dt = T / static_cast<double>(n_steps);

    const double inv_dx2 = 1.0 / (pde.dx * pde.dx);
    Eigen::ArrayXd d2 = Eigen::ArrayXd::Zero(m);
    for (long step = 0; step < n_steps; ++step) {
        d2.segment(1, m - 2) = (pde.u.segment(2, m - 2) - 2.0 * pde.u.segment(1, m - 2) +
                                pde.u.segment(0, m - 2)) *
                               inv_dx2;
        d2(0) = 0.0;
        d2(m - 1) = 0.0;
        pde.u += pde.dt * 0.5 *
                 (d2.max(0.0) * band.sigma_high_sq + d2.min(0.0) * band.sigma_low_sq);
    }
    return pde;
}

void write_pde_csv(const PdeSolution& pde, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
    out << "x,u\n";
    for (Eigen::Index i = 0; i < pde.x.size(); ++i)
        out << format_double(pde.x(i)) << ',' << format_double(pde.u(i)) << '\n';
}

}  // namespace greflect
