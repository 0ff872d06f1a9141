#pragma once

#include "greflect/gbm.hpp"
#include "greflect/grid_paths.hpp"

namespace greflect {

/// Reflected path x and its pusher k: x >= s exactly, k nondecreasing from 0,
/// x = y + k up to the clamping convention.
struct ReflectedPair {
    SamplePath x;
    IncreasingPath k;
};

namespace detail {

inline double neg_part(double y, double s) {
    const double d = s - y;
    return d > 0.0 ? d : 0.0;
}

/// One grid instant of the lower reflection: k <- max(k, (y - s)^-).
/// Clamps x to exactly s whenever k strictly increases; otherwise x = y + k
/// guarded against falling a rounding error below the obstacle.
inline double reflect_update(double y, double s, double& k) {
    const double d = neg_part(y, s);
    if (d > k) {
        k = d;
        return s;
    }
    const double x = y + k;
    return x < s ? s : x;
}

}  // namespace detail

/// Pathwise Skorokhod map for a lower obstacle: k_t = max_{u<=t}(y_u - s_u)^-,
/// x = y + k with the clamping convention. Requires y_0 >= s_0.
ReflectedPair skorokhod_map(const SamplePath& y, const SamplePath& s);

/// Upper-obstacle map by symmetry: reflect(-y, -s_upper) negated; x = y - k.
ReflectedPair skorokhod_map_upper(const SamplePath& y, const SamplePath& s_upper);

/// Reflection of the scenario's Brownian level at the zero obstacle.
ReflectedPair reflected_gbm(const GScenario& scenario);

/// riemann_sum_vn of (x - s) against k. Exactly 0 under the right rule by
/// the clamping convention; an O(mesh) diagnostic under the left rule.
double flat_off_residual(const ReflectedPair& pair, const SamplePath& s, EndpointRule rule);

/// CSV with header `t,x,k`.
void write_reflected_csv(const ReflectedPair& pair, const std::filesystem::path& file);

}  // namespace greflect
