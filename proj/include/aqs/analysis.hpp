#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "aqs/errors.hpp"

namespace aqs {

// Parameters of the average-case runtime model: a = sqrt(d^n_ab), x the
// fraction of variables given to the partial search, alpha the optimal x.
struct ComplexityModel {
    int d = 2;
    int n_ab = 0;
    int k = 3;
    double beta = 0.0;
    double beta_c = 4.25;

    double beta_ratio() const { return beta / beta_c; }
    double a() const; // sqrt(d^n_ab)
};

// Probability that a random assignment of the first n variables satisfies
// every constraint among them: d^{-n_ab (beta/beta_c) (n/n_ab)^k}.
double p_model(int n, const ComplexityModel& model);

// Root of (beta/beta_c) x^k + x - 1 = 0 in [0,1], bisected to 1e-12. The
// left side rises monotonically from -1 at x=0, so the root is unique.
double solve_alpha(int k, double beta_ratio);

// Argmin of the un-reduced objective a^x + a^{1-(beta/beta_c)x^k} over
// [0,1]; the reduced root above is its large-a limit.
double solve_alpha_exact(int k, double beta_ratio, double a);

// (a^x + a^{1-(beta/beta_c)x^k}) / a^{1-beta/beta_c}, evaluated exactly.
double predicted_time(const ComplexityModel& model, double x);

// round(alpha * n_ab) clamped to [1, n_ab-1].
int optimal_partition(int n_ab, int k, double beta_ratio);

struct ScalingFit {
    std::vector<std::pair<double, double>> points; // (size, time)
    double exponent = 0.0;
    double residual = 0.0; // rms residual of log(time) about the fit
};

// Least-squares slope of log(time) vs log(size); needs >= 4 points with
// strictly increasing sizes and positive times.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

} // namespace aqs
