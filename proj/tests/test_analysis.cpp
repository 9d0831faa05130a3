#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aqs/analysis.hpp"
#include "aqs/csp.hpp"

using namespace aqs;

TEST_CASE("p_model endpoints") {
    ComplexityModel m;
    m.d = 2;
    m.n_ab = 12;
    m.k = 3;
    m.beta = 3.0;
    m.beta_c = 4.25;
    CHECK(p_model(0, m) == doctest::Approx(1.0));
    m.beta = 0.0;
    for (int n = 0; n <= 12; ++n) CHECK(p_model(n, m) == doctest::Approx(1.0));
    CHECK_THROWS_AS(p_model(13, m), input_error);
}

TEST_CASE("p_model tracks ensemble prefix-satisfaction within a factor 3") {
    // The generator's ensemble fixes the model ratio: a random clause lies
    // inside the prefix with probability q = C(n,3)/C(N,3) and then kills
    // 1/8 of assignments, so E[M_A/2^n] = (1 - q/8)^m. Calibrating beta_c
    // to that ensemble gives beta_c = ln 2 / ln(8/7).
    const int n_ab = 10;
    const int m_clauses = 42;
    ComplexityModel model;
    model.d = 2;
    model.n_ab = n_ab;
    model.k = 3;
    model.beta = static_cast<double>(m_clauses) / n_ab;
    model.beta_c = std::log(2.0) / std::log(8.0 / 7.0);

    const int instances = 120;
    for (int n = 4; n <= 10; n += 2) {
        double mean_frac = 0.0;
        for (int i = 0; i < instances; ++i) {
            auto ins = generate_random_ksat(n_ab, m_clauses, 3, 50000 + i);
            const auto bitmap = satisfying_bitmap(ins, n);
            std::uint64_t count = 0;
            for (auto b : bitmap) count += b;
            mean_frac += static_cast<double>(count) / static_cast<double>(bitmap.size());
        }
        mean_frac /= instances;
        const double predicted = p_model(n, model);
        CHECK(mean_frac <= 3.0 * predicted);
        CHECK(mean_frac >= predicted / 3.0);
    }
}

TEST_CASE("solve_alpha reproduces the quoted roots") {
    CHECK(std::abs(solve_alpha(2, 1.0) - 0.62) <= 0.005);
    CHECK(std::abs(solve_alpha(3, 1.0) - 0.68) <= 0.005);
    CHECK(solve_alpha(3, 0.0) == doctest::Approx(1.0));
    // golden-ratio cross-check for k = 2
    CHECK(solve_alpha(2, 1.0) == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-10));
}

TEST_CASE("solve_alpha residual and monotonicity") {
    for (int k : {1, 2, 3, 4, 6}) {
        double prev = 2.0;
        for (double ratio : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double alpha = solve_alpha(k, ratio);
            CHECK(std::abs(ratio * std::pow(alpha, k) + alpha - 1.0) < 1e-10);
            CHECK(alpha <= prev + 1e-12); // nonincreasing in beta ratio
            prev = alpha;
        }
    }
    for (double ratio : {0.5, 1.0, 2.0}) {
        double prev = 0.0;
        for (int k : {1, 2, 3, 4, 8, 16}) {
            const double alpha = solve_alpha(k, ratio);
            CHECK(alpha >= prev - 1e-12); // nondecreasing in k
            prev = alpha;
        }
    }
    // alpha -> 1 trend as k grows at beta = beta_c
    CHECK(solve_alpha(64, 1.0) > solve_alpha(32, 1.0));
    CHECK(solve_alpha(256, 1.0) > solve_alpha(64, 1.0));
    CHECK(solve_alpha(1024, 1.0) > 0.99);
}

TEST_CASE("predicted_time closed-form points") {
    ComplexityModel m;
    m.d = 2;
    m.n_ab = 20;
    m.k = 3;
    m.beta_c = 1.0;
    m.beta = 1.0; // beta ratio 1
    const double a = m.a();
    CHECK(a == doctest::Approx(std::pow(2.0, 10.0)));
    // x = 1: no partial search, unstructured scaling a + 1
    CHECK(predicted_time(m, 1.0) == doctest::Approx(a + 1.0));
    // at the reduced root both exponents coincide: T = 2 a^alpha / a^0
    const double alpha = solve_alpha(3, 1.0);
    CHECK(predicted_time(m, alpha) == doctest::Approx(2.0 * std::pow(a, alpha)).epsilon(1e-9));
}

TEST_CASE("3-SAT exponent arithmetic: 0.5*alpha = 0.34 < 0.45") {
    const double half_alpha = 0.5 * solve_alpha(3, 1.0);
    CHECK(std::abs(half_alpha - 0.34) <= 0.005);
    CHECK(half_alpha < 0.45);
}

TEST_CASE("grid argmin approaches the reduced root as a grows") {
    // the reduction drops a log(3x^2)/ln(a) term, so the argmin error
    // shrinks like 1/ln(a)
    const double alpha = solve_alpha(3, 1.0);
    const double x_small = solve_alpha_exact(3, 1.0, std::pow(2.0, 20.0));
    const double x_large = solve_alpha_exact(3, 1.0, std::pow(2.0, 200.0));
    CHECK(std::abs(x_large - alpha) < std::abs(x_small - alpha));
    CHECK(std::abs(x_large - alpha) < 2.5e-3);

    ComplexityModel m;
    m.d = 2;
    m.n_ab = 400;
    m.k = 3;
    m.beta = 1.0;
    m.beta_c = 1.0;
    double best_x = 0.0, best_v = 1e300;
    for (int i = 0; i <= 10000; ++i) {
        const double x = i / 10000.0;
        const double v = predicted_time(m, x);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    CHECK(std::abs(best_x - alpha) < 2.5e-3);
}

TEST_CASE("optimal_partition rounding and clamping") {
    CHECK(optimal_partition(12, 3, 1.0) == 8); // 0.68*12 = 8.19 -> 8
    CHECK(optimal_partition(12, 3, 0.0) == 11);
    CHECK(optimal_partition(2, 3, 1.0) == 1);
    CHECK_THROWS_AS(optimal_partition(1, 3, 1.0), input_error);
}

TEST_CASE("fit_scaling recovers exact power laws") {
    std::vector<std::pair<double, double>> pts;
    for (double n : {16.0, 32.0, 64.0, 128.0, 256.0}) pts.emplace_back(n, std::sqrt(n));
    const auto fit = fit_scaling(pts);
    CHECK(fit.exponent == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.residual < 1e-12);

    CHECK_THROWS_AS(fit_scaling({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}}), input_error);
    CHECK_THROWS_AS(fit_scaling({{1.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}, {4.0, 4.0}}), input_error);
    CHECK_THROWS_AS(fit_scaling({{1.0, 1.0}, {2.0, -2.0}, {3.0, 3.0}, {4.0, 4.0}}), input_error);
}
