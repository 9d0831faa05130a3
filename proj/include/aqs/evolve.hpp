#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aqs/hilbert.hpp"
#include "aqs/schedule.hpp"

namespace aqs {

struct EvolutionResult {
    StateVector final_state;
    std::uint64_t steps = 0;
    double fidelity_to_ground = -1.0; // set when a ground bitmap is supplied
    std::vector<double> s_values;     // s_j at the step endpoints
};

// Continuum reference propagator: fine piecewise-constant exponentials of
// H(s(t)) = (1-s)H_i + sH_f, each evaluated matrix-free to machine
// precision. Serves as the oracle U(T) for the discretized engines.
EvolutionResult evolve_reference(HamPtr h_i, HamPtr h_f, const Schedule& schedule,
                                 std::size_t substeps, StateVector v0,
                                 const std::vector<std::uint8_t>* ground = nullptr);

// Product-formula engine: r steps of
//   U''_j = exp(-i(1-s_j)H_i dT) exp(-i s_j H_f dT),  s_j = s(j T / r),
// applied with closed-form factor exponentials only.
EvolutionResult evolve_discretized(HamPtr h_i, HamPtr h_f, const Schedule& schedule,
                                   std::uint64_t r, StateVector v0,
                                   const std::vector<std::uint8_t>* ground = nullptr);

// Both discretization error bounds and their measured counterparts.
//   piecewise: ||U(T) - U'(T)||  vs  sqrt(2 (T/r) ||H_i - H_f||)
//   trotter:   ||U'(T) - prod U''_j||  vs  (T^2/r) ||[H_i, H_f]|| (up to O(1))
// Dense propagators are used up to dense_cap; above that the distances are
// max state-distances over a batch of random states, flagged as estimates.
struct ErrorBudget {
    double diff_norm = 0.0;      // ||H_i - H_f||
    double comm_norm = 0.0;      // ||[H_i, H_f]||
    double piecewise_bound = 0.0;
    double trotter_bound_scale = 0.0;
    double measured_piecewise = 0.0;
    double measured_trotter = 0.0;
    double total_time = 0.0;
    std::uint64_t steps = 0;
    bool estimated = false;
};

ErrorBudget error_budget(HamPtr h_i, HamPtr h_f, const Schedule& schedule, std::uint64_t r,
                         std::size_t dense_cap = std::size_t(1) << 10,
                         std::size_t reference_substeps_per_step = 64);

double ground_mass(const StateVector& v, const std::vector<std::uint8_t>& ground);

} // namespace aqs
