#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "aqs/csp.hpp"
#include "aqs/evolve.hpp"
#include "aqs/hilbert.hpp"
#include "aqs/schedule.hpp"

namespace aqs {

// Numeric knobs of a nested run. The paper fixes stage times up to O(1)
// constants only; the step multipliers r = mult * T are exposed here and
// the achieved fidelities are reported instead of hard-coding constants.
struct NestedConfig {
    double epsilon = 0.1;
    double r_mult_a = 4.0;
    double r_mult_b = 4.0;
    double r_mult_c = 4.0;
    std::uint64_t min_steps = 4;
    std::size_t grid_points = 1025;
    std::uint64_t enum_cap = kDefaultEnumCap;
};

struct StagePlan {
    double t_a = 0.0, t_b = 0.0, t_c = 0.0;
    std::uint64_t r_a = 0, r_b = 0, r_c = 0;
    double epsilon = 0.0;
    Partition partition;
    double rc_over_tc = 0.0;
};

struct BranchDiagnostic {
    std::uint64_t m_a = 0;      // prefix basis index
    double fidelity = 0.0;      // within-branch overlap^2 with the branch target
    double phase = 0.0;         // measured phi_{m_A}
    double mass_drift = 0.0;    // |mass after - mass before| (leakage witness)
    bool has_extension = false; // S vs NS branch
};

struct StageAResult {
    StateVector state; // A register
    double fidelity = 0.0;
    Schedule schedule;
    std::uint64_t steps = 0;
};

struct StageBResult {
    StateVector state; // AB register
    double fidelity = 0.0;
    std::vector<BranchDiagnostic> branches;
    Schedule schedule;
    std::uint64_t steps = 0;
};

struct NestedRunReport {
    SolutionCensus census;
    StagePlan plan;
    double fidelity_after_a = 0.0;
    double fidelity_after_b = 0.0;
    std::vector<std::pair<std::uint64_t, double>> branch_phases; // m_A -> phi
    double final_solution_mass = 0.0;
    std::vector<double> histogram; // exact |amplitude|^2 per basis index
    double wall_time_model = 0.0;  // (T_A + T_B) * r_C
};

// Everything derived once per (instance, partition): census, marked-set
// bitmaps, stage Hamiltonians and schedules. The stage functions below
// build one internally; run_nested shares a single setup.
struct NestedSetup {
    CspInstance instance;
    Partition partition;
    SolutionCensus census;
    std::uint64_t dim_a = 0, dim_b = 0, dim_ab = 0;
    std::vector<std::uint8_t> ok_a; // prefix solutions over d^{n_a}
    std::vector<std::uint8_t> sol;  // full solutions over d^{n_ab}
    HamPtr stage_a_hi, stage_a_hf;  // A register
    HamPtr stage_b_hi, stage_b_hf;  // AB register
    HamPtr h0, stage_c_hf;          // AB register
    Schedule sched_a, sched_b, sched_c;
    StagePlan plan;
};

NestedSetup make_setup(const CspInstance& instance, Partition partition,
                       const NestedConfig& config = {});

StageAResult stage_a(const NestedSetup& setup);
StageAResult stage_a(const CspInstance& instance, Partition partition, double epsilon,
                     std::uint64_t r_a = 0); // r_a = 0: size from the plan

StageBResult stage_b(const NestedSetup& setup, const StateVector& state_after_a);
StageBResult stage_b(const CspInstance& instance, Partition partition,
                     const StateVector& state_after_a, double epsilon, std::uint64_t r_b = 0);

// The exact primitive factor sequence of the discretized stages A and B on
// the full register; replaying it backwards with negated angles is U^dag.
ProgramPtr build_u(const NestedSetup& setup);
ProgramPtr build_u(const CspInstance& instance, Partition partition, const StagePlan& plan);

EvolutionResult stage_c(const NestedSetup& setup, ProgramPtr u);
EvolutionResult stage_c(const CspInstance& instance, Partition partition, ProgramPtr u,
                        double epsilon, std::uint64_t r_c = 0);

NestedRunReport run_nested(const CspInstance& instance, Partition partition,
                           const NestedConfig& config = {});

// Ideal end-of-stage-B target (the analytic form with the given branch
// phases; zero phases when omitted). Used by diagnostics and verification.
StateVector ideal_psi_ab(const NestedSetup& setup,
                         const std::vector<std::pair<std::uint64_t, double>>* phases = nullptr);

} // namespace aqs
