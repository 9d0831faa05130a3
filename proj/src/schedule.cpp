#include "aqs/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace aqs {

double global_time(const AdiabaticParams& params) {
    if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
        throw input_error("global_time: epsilon must be in (0,1)");
    if (params.g_min <= 0.0) throw schedule_error("global_time: gap closes");
    return params.d_max / (params.epsilon * params.g_min * params.g_min);
}

double Schedule::s_at(double t) const {
    if (total_time <= 0.0) return 1.0;
    if (t <= 0.0) return 0.0;
    if (t >= total_time) return 1.0;
    if (kind == Kind::linear) return t / total_time;
    // Monotone piecewise-linear interpolation of the knot table. Repeated
    // t-knots (zero-cost stretches) resolve to the rightmost s.
    auto it = std::upper_bound(t_knots.begin(), t_knots.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - t_knots.begin());
    if (hi == 0) return s_knots.front();
    if (hi >= t_knots.size()) return s_knots.back();
    const double t0 = t_knots[hi - 1], t1 = t_knots[hi];
    const double s0 = s_knots[hi - 1], s1 = s_knots[hi];
    if (t1 <= t0) return s1;
    const double w = (t - t0) / (t1 - t0);
    return s0 + w * (s1 - s0);
}

Schedule linear_schedule(double total_time, std::size_t knots) {
    if (total_time <= 0.0) throw input_error("linear_schedule: T must be positive");
    if (knots < 2) throw input_error("linear_schedule: need at least two knots");
    Schedule sch;
    sch.kind = Schedule::Kind::linear;
    sch.total_time = total_time;
    sch.t_knots.resize(knots);
    sch.s_knots.resize(knots);
    for (std::size_t i = 0; i < knots; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(knots - 1);
        sch.s_knots[i] = s;
        sch.t_knots[i] = s * total_time;
    }
    sch.s_knots.back() = 1.0;
    sch.t_knots.back() = total_time;
    return sch;
}

Schedule local_schedule(const GapProfile& profile, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw input_error("local_schedule: epsilon must be in (0,1)");
    const std::size_t n = profile.s.size();
    if (n < 2) throw input_error("local_schedule: profile too small");

    // Integrand of t(s) = (1/eps) * int dmat/g^2. A point with dmat = 0 is
    // unconstrained and contributes nothing (the ground space is invariant
    // there); a coupled point whose gap has closed cannot be integrated
    // through. Ground degeneracy with a healthy coupled gap (flagged
    // endpoints of a degenerate search) is fine.
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (profile.dmat[i] == 0.0) {
            f[i] = 0.0;
            continue;
        }
        if (profile.gap[i] <= 1e-9 || !std::isfinite(profile.dmat[i]))
            throw schedule_error("local_schedule: gap closes inside the interval");
        f[i] = profile.dmat[i] / (profile.gap[i] * profile.gap[i]);
    }

    Schedule sch;
    sch.kind = Schedule::Kind::local;
    sch.s_knots = profile.s;
    sch.t_knots.resize(n);
    sch.t_knots[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double ds = profile.s[i] - profile.s[i - 1];
        if (ds <= 0.0) throw input_error("local_schedule: grid must strictly increase");
        sch.t_knots[i] = sch.t_knots[i - 1] + 0.5 * (f[i] + f[i - 1]) * ds / epsilon;
    }
    sch.total_time = sch.t_knots.back();
    if (sch.total_time <= 0.0) {
        // Fully decoupled pair: the initial state is already stationary.
        // Return a token-length linear ramp so downstream step counts exist.
        return linear_schedule(1.0, n);
    }
    return sch;
}

double time_for_unstructured(std::uint64_t n_states, std::uint64_t n_marked, double epsilon,
                             std::size_t grid_points) {
    if (n_marked > n_states) throw input_error("time_for_unstructured: M > N");
    if (n_states == 0) throw input_error("time_for_unstructured: N must be positive");
    if (n_marked == 0)
        throw schedule_error("time_for_unstructured: no marked states, gap closes");
    const double a2 = static_cast<double>(n_marked) / static_cast<double>(n_states);
    const auto grid = uniform_grid(grid_points);
    const auto profile = two_level_profile(a2, grid);
    return local_schedule(profile, epsilon).total_time;
}

} // namespace aqs
