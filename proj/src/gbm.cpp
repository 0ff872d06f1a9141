#include "greflect/gbm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "greflect/rng.hpp"

namespace greflect {

void VolatilityBand::validate() const {
    if (!(sigma_low_sq > 0.0))
        throw std::invalid_argument("VolatilityBand: sigma_low_sq must be positive");
    if (!(sigma_low_sq <= sigma_high_sq))
        throw std::invalid_argument("VolatilityBand: sigma_low_sq must not exceed sigma_high_sq");
}

double g_function(double a, const VolatilityBand& band) {
    const double a_plus = a > 0.0 ? a : 0.0;
    const double a_minus = a < 0.0 ? -a : 0.0;
    return 0.5 * (a_plus * band.sigma_high_sq - a_minus * band.sigma_low_sq);
}

VolatilityControl VolatilityControl::constant(double sigma_sq, VolatilityBand band) {
    band.validate();
    if (sigma_sq < band.sigma_low_sq || sigma_sq > band.sigma_high_sq)
        throw std::invalid_argument("VolatilityControl: constant rate outside the band");
    VolatilityControl c;
    c.kind_ = Kind::Constant;
    c.band_ = band;
    c.constant_sq_ = sigma_sq;
    c.label_ = "const:" + format_double(sigma_sq);
    return c;
}

VolatilityControl VolatilityControl::piecewise_constant(std::vector<double> breakpoints,
                                                        std::vector<double> sigma_sqs,
                                                        VolatilityBand band) {
    band.validate();
    if (sigma_sqs.size() != breakpoints.size() + 1)
        throw std::invalid_argument("VolatilityControl: need one rate per piece");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("VolatilityControl: breakpoints must increase");
    for (double v : sigma_sqs)
        if (v < band.sigma_low_sq || v > band.sigma_high_sq)
            throw std::invalid_argument("VolatilityControl: piece rate outside the band");
    VolatilityControl c;
    c.kind_ = Kind::PiecewiseConstant;
    c.band_ = band;
    c.breakpoints_ = std::move(breakpoints);
    c.piece_values_ = std::move(sigma_sqs);
    c.label_ = "piecewise:" + std::to_string(c.piece_values_.size());
    return c;
}

VolatilityControl VolatilityControl::bang_bang(double threshold, bool above,
                                               VolatilityBand band) {
    band.validate();
    VolatilityControl c;
    c.kind_ = Kind::BangBang;
    c.band_ = band;
    c.threshold_ = threshold;
    c.above_ = above;
    c.label_ = std::string("bang_bang:") + (above ? "gt:" : "le:") + format_double(threshold);
    return c;
}

VolatilityControl VolatilityControl::random_switch(double intensity, std::uint64_t stream,
                                                   VolatilityBand band) {
    band.validate();
    if (!(intensity >= 0.0))
        throw std::invalid_argument("VolatilityControl: switch intensity must be >= 0");
    VolatilityControl c;
    c.kind_ = Kind::RandomSwitch;
    c.band_ = band;
    c.intensity_ = intensity;
    c.stream_ = stream;
    c.label_ = "random_switch:" + format_double(intensity);
    return c;
}

double VolatilityControl::sigma_sq_at(double t, double b_state, std::uint64_t seed,
                                      std::uint64_t path, Eigen::Index step, double dt,
                                      bool& switch_state) const {
    switch (kind_) {
        case Kind::Constant:
            return constant_sq_;
        case Kind::PiecewiseConstant: {
            std::size_t piece = 0;
            while (piece < breakpoints_.size() && t >= breakpoints_[piece]) ++piece;
            return piece_values_[piece];
        }
        case Kind::BangBang: {
            const bool indicator = (b_state > threshold_) == above_;
            return indicator ? band_.sigma_high_sq : band_.sigma_low_sq;
        }
        case Kind::RandomSwitch: {
            const double u = rng::uniform01(seed ^ rng::mix64(stream_), path,
                                            static_cast<std::uint64_t>(step), 2);
            if (u < intensity_ * dt) switch_state = !switch_state;
            return switch_state ? band_.sigma_high_sq : band_.sigma_low_sq;
        }
    }
    return band_.sigma_high_sq;
}

GScenario simulate_scenario(const VolatilityControl& control, const TimeGrid& grid,
                            std::uint64_t seed, std::uint64_t path_index) {
    control.band().validate();
    const Eigen::Index n = grid.size();
    GScenario sc;
    sc.grid = grid;
    sc.seed = seed;
    sc.path_index = path_index;
    sc.b.resize(n);
    sc.qv.resize(n);
    sc.sigma_sq.resize(n);
    sc.db.resize(n - 1);
    sc.dqv.resize(n - 1);
    sc.b(0) = 0.0;
    sc.qv(0) = 0.0;
    bool switch_state = control.initial_switch_state();
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double dt = grid.dt(k);
        const double rate = control.sigma_sq_at(grid.t(k), sc.b(k), seed, path_index, k, dt,
                                                switch_state);
        const double xi = rng::standard_normal(seed, path_index, static_cast<std::uint64_t>(k));
        sc.sigma_sq(k) = rate;
        sc.db(k) = std::sqrt(rate) * std::sqrt(dt) * xi;
        sc.dqv(k) = rate * dt;
        sc.b(k + 1) = sc.b(k) + sc.db(k);
        sc.qv(k + 1) = sc.qv(k) + sc.dqv(k);
    }
    sc.sigma_sq(n - 1) = sc.sigma_sq(n - 2);
    return sc;
}

QvIdentityResidual qv_identity_residual(const GScenario& scenario) {
    const Eigen::ArrayXd& b = scenario.b;
    double sum_b_db = 0.0;
    double sum_db_sq = 0.0;
    for (Eigen::Index k = 0; k + 1 < b.size(); ++k) {
        const double db = b(k + 1) - b(k);
        sum_b_db += b(k) * db;
        sum_db_sq += db * db;
    }
    const double b_T = b(b.size() - 1);
    const double qv_T = scenario.qv(scenario.qv.size() - 1);
    return QvIdentityResidual{b_T * b_T - 2.0 * sum_b_db - sum_db_sq, sum_db_sq - qv_T};
}

std::vector<VolatilityControl> build_family(const FamilySpec& spec) {
    spec.band.validate();
    if (spec.n_constants < 1)
        throw std::invalid_argument("build_family: need at least one constant control");
    std::vector<VolatilityControl> family;
    if (spec.n_constants == 1) {
        family.push_back(VolatilityControl::constant(spec.band.sigma_high_sq, spec.band));
    } else {
        const double lo = spec.band.sigma_low_sq;
        const double hi = spec.band.sigma_high_sq;
        for (int i = 0; i < spec.n_constants; ++i) {
            const double w = static_cast<double>(i) / static_cast<double>(spec.n_constants - 1);
            const double v = i + 1 == spec.n_constants ? hi : lo + w * (hi - lo);
            family.push_back(VolatilityControl::constant(v, spec.band));
        }
    }
    if (spec.include_bang_bang)
        family.push_back(VolatilityControl::bang_bang(0.0, true, spec.band));
    if (spec.switch_intensity > 0.0)
        family.push_back(VolatilityControl::random_switch(spec.switch_intensity, 1, spec.band));
    return family;
}

void write_scenario_csv(const GScenario& scenario, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
    out << "t,b,qv,sigma_sq\n";
    for (Eigen::Index k = 0; k < scenario.grid.size(); ++k) {
        out << format_double(scenario.grid.t(k)) << ',' << format_double(scenario.b(k)) << ','
            << format_double(scenario.qv(k)) << ',' << format_double(scenario.sigma_sq(k))
            << '\n';
    }
}

}  // namespace greflect
