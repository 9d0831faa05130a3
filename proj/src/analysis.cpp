#include "aqs/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace aqs {

double ComplexityModel::a() const {
    return std::pow(static_cast<double>(d), 0.5 * n_ab);
}

double p_model(int n, const ComplexityModel& model) {
    if (n < 0 || n > model.n_ab) throw input_error("p_model: n out of range");
    if (model.n_ab == 0) return 1.0;
    const double frac = static_cast<double>(n) / model.n_ab;
    const double expo = model.n_ab * model.beta_ratio() * std::pow(frac, model.k);
    return std::pow(static_cast<double>(model.d), -expo);
}

double solve_alpha(int k, double beta_ratio) {
    if (k < 1) throw input_error("solve_alpha: k must be >= 1");
    if (beta_ratio < 0.0) throw input_error("solve_alpha: beta ratio must be >= 0");
    auto f = [&](double x) { return beta_ratio * std::pow(x, k) + x - 1.0; };
    double lo = 0.0, hi = 1.0;
    if (f(hi) <= 0.0) return 1.0; // beta_ratio == 0 degenerates to x = 1
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

// log(a^x + a^{1-r x^k}) evaluated stably in log space.
double log_objective(double x, int k, double r, double log_a) {
    const double e1 = x * log_a;
    const double e2 = (1.0 - r * std::pow(x, k)) * log_a;
    const double m = std::max(e1, e2);
    return m + std::log(std::exp(e1 - m) + std::exp(e2 - m));
}

} // namespace

double solve_alpha_exact(int k, double beta_ratio, double a) {
    if (k < 1) throw input_error("solve_alpha_exact: k must be >= 1");
    if (!(a > 1.0)) throw input_error("solve_alpha_exact: a must exceed 1");
    const double log_a = std::log(a);

    // Coarse scan then golden-section refinement; the objective is smooth
    // with a single interior minimum for beta_ratio > 0.
    const int n_scan = 4096;
    double best_x = 1.0, best_v = log_objective(1.0, k, beta_ratio, log_a);
    for (int i = 0; i <= n_scan; ++i) {
        const double x = static_cast<double>(i) / n_scan;
        const double v = log_objective(x, k, beta_ratio, log_a);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    double lo = std::max(0.0, best_x - 1.0 / n_scan);
    double hi = std::min(1.0, best_x + 1.0 / n_scan);
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = log_objective(x1, k, beta_ratio, log_a);
    double f2 = log_objective(x2, k, beta_ratio, log_a);
    while (hi - lo > 1e-12) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = log_objective(x1, k, beta_ratio, log_a);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = log_objective(x2, k, beta_ratio, log_a);
        }
    }
    return 0.5 * (lo + hi);
}

double predicted_time(const ComplexityModel& model, double x) {
    if (x < 0.0 || x > 1.0) throw input_error("predicted_time: x outside [0,1]");
    const double a = model.a();
    const double r = model.beta_ratio();
    const double numer = std::pow(a, x) + std::pow(a, 1.0 - r * std::pow(x, model.k));
    const double denom = std::pow(a, 1.0 - r);
    return numer / denom;
}

int optimal_partition(int n_ab, int k, double beta_ratio) {
    if (n_ab < 2) throw input_error("optimal_partition: n_ab must be >= 2");
    const double alpha = solve_alpha(k, beta_ratio);
    const int n_a = static_cast<int>(std::lround(alpha * n_ab));
    return std::clamp(n_a, 1, n_ab - 1);
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4) throw input_error("fit_scaling: need at least 4 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].second <= 0.0) throw input_error("fit_scaling: times must be positive");
        if (points[i].first <= 0.0) throw input_error("fit_scaling: sizes must be positive");
        if (i > 0 && points[i].first <= points[i - 1].first)
            throw input_error("fit_scaling: sizes must strictly increase");
    }
    const std::size_t n = points.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [size, time] : points) {
        const double lx = std::log(size), ly = std::log(time);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw input_error("fit_scaling: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;

    double ss = 0.0;
    for (const auto& [size, time] : points) {
        const double resid = std::log(time) - (intercept + slope * std::log(size));
        ss += resid * resid;
    }
    ScalingFit fit;
    fit.points = points;
    fit.exponent = slope;
    fit.residual = std::sqrt(ss / n);
    return fit;
}

} // namespace aqs
