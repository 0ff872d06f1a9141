#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <string>

namespace greflect {

/// Finite partition 0 = t_0 < t_1 < ... < t_N = T. Copies are cheap (the
/// instants are shared, immutable storage).
class TimeGrid {
  public:
    TimeGrid() = default;
    explicit TimeGrid(Eigen::ArrayXd times);

    const Eigen::ArrayXd& times() const { return *times_; }
    double horizon() const { return (*times_)(times_->size() - 1); }
    Eigen::Index size() const { return times_->size(); }            // instants
    Eigen::Index steps() const { return times_->size() - 1; }       // intervals
    double t(Eigen::Index k) const { return (*times_)(k); }
    double dt(Eigen::Index k) const { return (*times_)(k + 1) - (*times_)(k); }

    bool same_grid(const TimeGrid& other) const;

  private:
    std::shared_ptr<const Eigen::ArrayXd> times_;
};

/// Uniform grid with N steps on [0, T].
TimeGrid make_grid(double T, Eigen::Index N);

/// Inserts the midpoint of every interval; input instants preserved.
TimeGrid refine(const TimeGrid& grid);

/// Largest interval length max_k (t_{k+1} - t_k).
double mesh(const TimeGrid& grid);

/// Real values aligned to a grid, one per instant.
struct SamplePath {
    TimeGrid grid;
    Eigen::ArrayXd values;

    SamplePath() = default;
    SamplePath(TimeGrid g, Eigen::ArrayXd v);

    Eigen::Index size() const { return values.size(); }
};

SamplePath constant_path(const TimeGrid& grid, double value);

/// Nondecreasing path; starts at 0 when used as a reflection term.
struct IncreasingPath {
    SamplePath path;

    IncreasingPath() = default;
    explicit IncreasingPath(SamplePath p);
    const Eigen::ArrayXd& values() const { return path.values; }
};

/// Grid-level Jordan decomposition: plus collects positive increments,
/// minus collects negative ones; reconstructed path = plus - minus.
struct BVPath {
    IncreasingPath plus;
    IncreasingPath minus;
    double total_variation = 0.0;
};

enum class EndpointRule { Left, Right };

/// Sum_j x(u_j) (k_{t_{j+1}} - k_{t_j}) with u_j the chosen endpoint of
/// [t_j, t_{j+1}).
double riemann_sum_vn(const SamplePath& x, const SamplePath& k, EndpointRule rule);

/// Integral of x against a bounded-variation integrator via its Jordan
/// decomposition (left rule).
double stieltjes_integral(const SamplePath& x, const BVPath& k,
                          EndpointRule rule = EndpointRule::Left);

BVPath jordan_decompose(const SamplePath& path);

/// Sum of squared increments.
double grid_quadratic_variation(const SamplePath& path);

/// CSV with header `t,value`, one row per instant, round-trip formatting.
void write_path_csv(const SamplePath& path, const std::filesystem::path& file);
SamplePath read_path_csv(const std::filesystem::path& file);

/// %.17g formatting used for every numeric CSV cell.
std::string format_double(double v);

}  // namespace greflect
