#pragma once

#include <cstdint>
#include <vector>

#include "aqs/hilbert.hpp"

namespace aqs {

struct AdiabaticParams {
    double epsilon; // adiabaticity budget, 0 < epsilon < 1
    double g_min;
    double d_max;
};

// Total time satisfying the global adiabatic condition D_max/g_min^2 <= eps
// for a uniform sweep: T = d_max / (epsilon * g_min^2).
double global_time(const AdiabaticParams& params);

// Monotone map t -> s(t) with s(0) = 0 and s(T) = 1, stored as a knot table.
// Linear schedules evaluate exactly; local schedules interpolate the table.
struct Schedule {
    enum class Kind { linear, local };
    Kind kind = Kind::linear;
    double total_time = 0.0;
    std::vector<double> t_knots;
    std::vector<double> s_knots;

    double s_at(double t) const;
};

Schedule linear_schedule(double total_time, std::size_t knots = 1025);

// Local adiabatic schedule: ds/dt = epsilon g(s)^2 / dmat(s), integrated by
// the trapezoid rule on the profile grid. Interior points where the gap has
// closed (flagged with nonzero coupling) abort.
Schedule local_schedule(const GapProfile& profile, double epsilon);

// Total local-schedule time for the unstructured pair with M marked of N.
double time_for_unstructured(std::uint64_t n_states, std::uint64_t n_marked, double epsilon,
                             std::size_t grid_points = 1025);

} // namespace aqs
