#include "aqs/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#ifdef AQS_HAVE_OPENMP
#include <omp.h>
#endif

namespace aqs {

double ground_mass(const StateVector& v, const std::vector<std::uint8_t>& ground) {
    if (v.dim() != ground.size()) throw input_error("ground_mass: dimension mismatch");
    return kern::masked_mass(v.amp.data(), ground.data(), v.dim());
}

EvolutionResult evolve_reference(HamPtr h_i, HamPtr h_f, const Schedule& schedule,
                                 std::size_t substeps, StateVector v0,
                                 const std::vector<std::uint8_t>* ground) {
    if (!h_i || !h_f || h_i->dim() != h_f->dim()) throw input_error("evolve: dimension mismatch");
    if (v0.dim() != h_i->dim()) throw input_error("evolve: state dimension mismatch");
    if (substeps < 1) throw input_error("evolve_reference: substeps must be >= 1");

    const double total = schedule.total_time;
    const double dt = total / static_cast<double>(substeps);
    EvolutionResult res;
    res.steps = substeps;

    // Midpoint sampling keeps the piecewise-constant approximation second
    // order in the substep width, so modest substep counts reach the
    // accuracy the oracle role needs even for long schedules.
    for (std::size_t j = 1; j <= substeps; ++j) {
        const double s = schedule.s_at((static_cast<double>(j) - 0.5) * dt);
        const auto h = make_affine(1.0 - s, h_i, s, h_f);
        expm_apply(*h, dt, v0);
    }
    if (ground) res.fidelity_to_ground = ground_mass(v0, *ground);
    res.final_state = std::move(v0);
    return res;
}

EvolutionResult evolve_discretized(HamPtr h_i, HamPtr h_f, const Schedule& schedule,
                                   std::uint64_t r, StateVector v0,
                                   const std::vector<std::uint8_t>* ground) {
    if (!h_i || !h_f || h_i->dim() != h_f->dim()) throw input_error("evolve: dimension mismatch");
    if (v0.dim() != h_i->dim()) throw input_error("evolve: state dimension mismatch");
    if (r < 1) throw input_error("evolve_discretized: r must be >= 1");

    const double total = schedule.total_time;
    const double dT = total / static_cast<double>(r);
    EvolutionResult res;
    res.steps = r;
    res.s_values.reserve(r);

    for (std::uint64_t j = 1; j <= r; ++j) {
        const double s_j = schedule.s_at(static_cast<double>(j) * dT);
        res.s_values.push_back(s_j);
        // State is multiplied by exp(-i(1-s_j)H_i dT) * exp(-i s_j H_f dT):
        // the H_f factor acts first.
        apply_exponential(*h_f, s_j * dT, v0);
        apply_exponential(*h_i, (1.0 - s_j) * dT, v0);
    }
    if (ground) res.fidelity_to_ground = ground_mass(v0, *ground);
    res.final_state = std::move(v0);
    return res;
}

namespace {

// Dense continuum propagator via column-wise reference evolution.
Eigen::MatrixXcd dense_reference(HamPtr h_i, HamPtr h_f, const Schedule& schedule,
                                 std::size_t substeps, std::size_t dim) {
    Eigen::MatrixXcd u(static_cast<long>(dim), static_cast<long>(dim));
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (exec_mode() == ExecMode::parallel)
#endif
    for (long col = 0; col < static_cast<long>(dim); ++col) {
        StateVector v = basis_state(dim, static_cast<std::size_t>(col));
        auto res = evolve_reference(h_i, h_f, schedule, substeps, std::move(v));
        for (std::size_t i = 0; i < dim; ++i)
            u(static_cast<long>(i), col) = res.final_state.amp[i];
    }
    return u;
}

// Dense piecewise-constant propagator U'(T) = prod_j exp(-i H(s_j) dT).
Eigen::MatrixXcd dense_piecewise(HamPtr h_i, HamPtr h_f, const Schedule& schedule, std::uint64_t r,
                                 std::size_t dim, std::size_t dense_cap) {
    const Eigen::MatrixXcd hi_d = to_dense(*h_i, dense_cap);
    const Eigen::MatrixXcd hf_d = to_dense(*h_f, dense_cap);
    const double dT = schedule.total_time / static_cast<double>(r);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(static_cast<long>(dim), static_cast<long>(dim));
    for (std::uint64_t j = 1; j <= r; ++j) {
        const double s_j = schedule.s_at(static_cast<double>(j) * dT);
        const Eigen::MatrixXcd h = (1.0 - s_j) * hi_d + s_j * hf_d;
        u = dense_exponential(h, dT) * u;
    }
    return u;
}

// Dense product-formula propagator via column-wise discretized evolution.
Eigen::MatrixXcd dense_product(HamPtr h_i, HamPtr h_f, const Schedule& schedule, std::uint64_t r,
                               std::size_t dim) {
    Eigen::MatrixXcd u(static_cast<long>(dim), static_cast<long>(dim));
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (exec_mode() == ExecMode::parallel)
#endif
    for (long col = 0; col < static_cast<long>(dim); ++col) {
        StateVector v = basis_state(dim, static_cast<std::size_t>(col));
        auto res = evolve_discretized(h_i, h_f, schedule, r, std::move(v));
        for (std::size_t i = 0; i < dim; ++i)
            u(static_cast<long>(i), col) = res.final_state.amp[i];
    }
    return u;
}

} // namespace

ErrorBudget error_budget(HamPtr h_i, HamPtr h_f, const Schedule& schedule, std::uint64_t r,
                         std::size_t dense_cap, std::size_t reference_substeps_per_step) {
    if (!h_i || !h_f || h_i->dim() != h_f->dim())
        throw input_error("error_budget: dimension mismatch");
    if (r < 1) throw input_error("error_budget: r must be >= 1");
    const std::size_t dim = h_i->dim();
    const double total = schedule.total_time;

    ErrorBudget eb;
    eb.total_time = total;
    eb.steps = r;
    eb.diff_norm = spectral_norm_matfree(*make_affine(1.0, h_i, -1.0, h_f));
    eb.comm_norm = commutator_norm_matfree(*h_i, *h_f);
    eb.piecewise_bound = std::sqrt(2.0 * (total / static_cast<double>(r)) * eb.diff_norm);
    eb.trotter_bound_scale = total * total / static_cast<double>(r) * eb.comm_norm;

    const std::size_t substeps =
        static_cast<std::size_t>(r) * std::max<std::size_t>(reference_substeps_per_step, 1);

    if (dim <= dense_cap) {
        const auto u_cont = dense_reference(h_i, h_f, schedule, substeps, dim);
        const auto u_pw = dense_piecewise(h_i, h_f, schedule, r, dim, dense_cap);
        const auto u_prod = dense_product(h_i, h_f, schedule, r, dim);
        eb.measured_piecewise = operator_norm(u_cont - u_pw);
        eb.measured_trotter = operator_norm(u_pw - u_prod);
        eb.estimated = false;
        return eb;
    }

    // Above the dense cap: max state-distance over a batch of random states.
    constexpr int kBatch = 32;
    std::mt19937_64 rng(0xb0b5eedULL);
    std::normal_distribution<double> g(0.0, 1.0);
    double max_pw = 0.0, max_tr = 0.0;
    for (int b = 0; b < kBatch; ++b) {
        StateVector v;
        v.amp.resize(dim);
        for (auto& x : v.amp) x = cplx{g(rng), g(rng)};
        v.normalize();

        auto cont = evolve_reference(h_i, h_f, schedule, substeps, v);
        auto prod = evolve_discretized(h_i, h_f, schedule, r, v);

        // Piecewise-constant state under H(s_j), matrix-free per step.
        StateVector pw = v;
        const double dT = total / static_cast<double>(r);
        for (std::uint64_t j = 1; j <= r; ++j) {
            const double s_j = schedule.s_at(static_cast<double>(j) * dT);
            expm_apply(*make_affine(1.0 - s_j, h_i, s_j, h_f), dT, pw);
        }

        auto dist = [dim](const StateVector& a, const StateVector& b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i) acc += std::norm(a.amp[i] - b.amp[i]);
            return std::sqrt(acc);
        };
        max_pw = std::max(max_pw, dist(cont.final_state, pw));
        max_tr = std::max(max_tr, dist(pw, prod.final_state));
    }
    eb.measured_piecewise = max_pw;
    eb.measured_trotter = max_tr;
    eb.estimated = true;
    return eb;
}

} // namespace aqs
