#include "greflect/grid_paths.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace greflect {

TimeGrid::TimeGrid(Eigen::ArrayXd times) {
    if (times.size() < 2) throw std::invalid_argument("TimeGrid: need at least two instants");
    if (times(0) != 0.0) throw std::invalid_argument("TimeGrid: first instant must be 0");
    for (Eigen::Index k = 0; k + 1 < times.size(); ++k) {
        if (!(times(k) < times(k + 1)))
            throw std::invalid_argument("TimeGrid: instants must be strictly increasing");
    }
    times_ = std::make_shared<const Eigen::ArrayXd>(std::move(times));
}

bool TimeGrid::same_grid(const TimeGrid& other) const {
    if (times_ == other.times_) return true;
    if (!times_ || !other.times_) return false;
    if (times_->size() != other.times_->size()) return false;
    return (*times_ == *other.times_).all();
}

TimeGrid make_grid(double T, Eigen::Index N) {
    if (!(T > 0.0)) throw std::invalid_argument("make_grid: horizon T must be positive");
    if (N < 1) throw std::invalid_argument("make_grid: need at least one step");
    Eigen::ArrayXd times(N + 1);
    const double dt = T / static_cast<double>(N);
    for (Eigen::Index k = 0; k <= N; ++k) times(k) = static_cast<double>(k) * dt;
    times(N) = T;  // endpoint exact
    return TimeGrid(std::move(times));
}

TimeGrid refine(const TimeGrid& grid) {
    const Eigen::ArrayXd& t = grid.times();
    Eigen::ArrayXd out(2 * t.size() - 1);
    for (Eigen::Index k = 0; k + 1 < t.size(); ++k) {
        out(2 * k) = t(k);
        out(2 * k + 1) = 0.5 * (t(k) + t(k + 1));
    }
    out(out.size() - 1) = t(t.size() - 1);
    return TimeGrid(std::move(out));
}

double mesh(const TimeGrid& grid) {
    const Eigen::ArrayXd& t = grid.times();
    return (t.tail(t.size() - 1) - t.head(t.size() - 1)).maxCoeff();
}

SamplePath::SamplePath(TimeGrid g, Eigen::ArrayXd v)
    : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size())
        throw std::invalid_argument("SamplePath: one value per grid instant required");
}

SamplePath constant_path(const TimeGrid& grid, double value) {
    return SamplePath(grid, Eigen::ArrayXd::Constant(grid.size(), value));
}

IncreasingPath::IncreasingPath(SamplePath p) : path(std::move(p)) {
    const Eigen::ArrayXd& v = path.values;
    for (Eigen::Index k = 0; k + 1 < v.size(); ++k) {
        if (v(k) > v(k + 1))
            throw std::invalid_argument("IncreasingPath: values must be nondecreasing");
    }
}

double riemann_sum_vn(const SamplePath& x, const SamplePath& k, EndpointRule rule) {
    if (!x.grid.same_grid(k.grid))
        throw std::invalid_argument("riemann_sum_vn: integrand and integrator grids differ");
    const Eigen::Index off = rule == EndpointRule::Left ? 0 : 1;
    double acc = 0.0;
    for (Eigen::Index j = 0; j + 1 < x.size(); ++j)
        acc += x.values(j + off) * (k.values(j + 1) - k.values(j));
    return acc;
}

double stieltjes_integral(const SamplePath& x, const BVPath& k, EndpointRule rule) {
    return riemann_sum_vn(x, k.plus.path, rule) - riemann_sum_vn(x, k.minus.path, rule);
}

BVPath jordan_decompose(const SamplePath& path) {
    const Eigen::ArrayXd& v = path.values;
    Eigen::ArrayXd plus(v.size()), minus(v.size());
    plus(0) = v(0);
    minus(0) = 0.0;
    double tv = 0.0;
    for (Eigen::Index k = 0; k + 1 < v.size(); ++k) {
        const double dv = v(k + 1) - v(k);
        plus(k + 1) = plus(k) + (dv > 0.0 ? dv : 0.0);
        minus(k + 1) = minus(k) + (dv < 0.0 ? -dv : 0.0);
        tv += std::abs(dv);
    }
    return BVPath{IncreasingPath(SamplePath(path.grid, std::move(plus))),
                  IncreasingPath(SamplePath(path.grid, std::move(minus))), tv};
}

double grid_quadratic_variation(const SamplePath& path) {
    const Eigen::ArrayXd& v = path.values;
    double acc = 0.0;
    for (Eigen::Index k = 0; k + 1 < v.size(); ++k) {
        const double dv = v(k + 1) - v(k);
        acc += dv * dv;
    }
    return acc;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_path_csv(const SamplePath& path, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
    out << "t,value\n";
    for (Eigen::Index k = 0; k < path.size(); ++k)
        out << format_double(path.grid.t(k)) << ',' << format_double(path.values(k)) << '\n';
}

SamplePath read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open: " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != "t,value")
        throw std::runtime_error("bad path CSV header in " + file.string());
    std::vector<double> ts, vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("bad path CSV row in " + file.string());
        ts.push_back(std::stod(line.substr(0, comma)));
        vs.push_back(std::stod(line.substr(comma + 1)));
    }
    Eigen::ArrayXd t = Eigen::Map<Eigen::ArrayXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
    Eigen::ArrayXd v = Eigen::Map<Eigen::ArrayXd>(vs.data(), static_cast<Eigen::Index>(vs.size()));
    return SamplePath(TimeGrid(std::move(t)), std::move(v));
}

}  // namespace greflect
