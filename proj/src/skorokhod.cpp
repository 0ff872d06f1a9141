#include "greflect/skorokhod.hpp"

#include <fstream>
#include <stdexcept>

namespace greflect {

ReflectedPair skorokhod_map(const SamplePath& y, const SamplePath& s) {
    if (!y.grid.same_grid(s.grid))
        throw std::invalid_argument("skorokhod_map: driver and obstacle grids differ");
    if (y.values(0) < s.values(0))
        throw std::invalid_argument("skorokhod_map: driver must start at or above the obstacle");
    const Eigen::Index n = y.size();
    Eigen::ArrayXd x(n), k(n);
    double running = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = detail::reflect_update(y.values(i), s.values(i), running);
        k(i) = running;
    }
    return ReflectedPair{SamplePath(y.grid, std::move(x)),
                         IncreasingPath(SamplePath(y.grid, std::move(k)))};
}

ReflectedPair skorokhod_map_upper(const SamplePath& y, const SamplePath& s_upper) {
    if (!y.grid.same_grid(s_upper.grid))
        throw std::invalid_argument("skorokhod_map_upper: driver and obstacle grids differ");
    if (y.values(0) > s_upper.values(0))
        throw std::invalid_argument(
            "skorokhod_map_upper: driver must start at or below the obstacle");
    ReflectedPair lower = skorokhod_map(SamplePath(y.grid, -y.values),
                                        SamplePath(y.grid, -s_upper.values));
    return ReflectedPair{SamplePath(y.grid, -lower.x.values), std::move(lower.k)};
}

ReflectedPair reflected_gbm(const GScenario& scenario) {
    return skorokhod_map(scenario.b_path(), constant_path(scenario.grid, 0.0));
}

double flat_off_residual(const ReflectedPair& pair, const SamplePath& s, EndpointRule rule) {
    SamplePath gap(pair.x.grid, pair.x.values - s.values);
    return riemann_sum_vn(gap, pair.k.path, rule);
}

void write_reflected_csv(const ReflectedPair& pair, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
    out << "t,x,k\n";
    for (Eigen::Index i = 0; i < pair.x.size(); ++i) {
        out << format_double(pair.x.grid.t(i)) << ',' << format_double(pair.x.values(i)) << ','
            << format_double(pair.k.values()(i)) << '\n';
    }
}

}  // namespace greflect
