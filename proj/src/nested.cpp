#include "aqs/nested.hpp"

#include <algorithm>
#include <cmath>

namespace aqs {

namespace {

std::uint64_t sized_steps(double total_time, double mult, std::uint64_t min_steps) {
    const double r = std::ceil(std::max(1.0, mult * total_time));
    return std::max<std::uint64_t>(min_steps, static_cast<std::uint64_t>(r));
}

// Local schedule of the exact two-level reduction shared by every stage
// pair (I - |psi><psi|, I - P_marked) with a2 = |P_marked psi|^2. A zero
// a2 means the gap closes; callers turn that into a domain error first.
Schedule stage_schedule(double a2, std::size_t grid_points, double epsilon) {
    const auto grid = uniform_grid(grid_points);
    return local_schedule(two_level_profile(a2, grid), epsilon);
}

} // namespace

NestedSetup make_setup(const CspInstance& instance, Partition partition,
                       const NestedConfig& config) {
    instance.validate();
    check_partition(instance, partition);

    NestedSetup su;
    su.instance = instance;
    su.partition = partition;
    su.census = census(instance, partition, config.enum_cap);
    su.dim_a = pow_u64(static_cast<std::uint64_t>(instance.d), partition.n_a);
    su.dim_b = pow_u64(static_cast<std::uint64_t>(instance.d), partition.n_b);
    su.dim_ab = su.dim_a * su.dim_b;

    su.ok_a = satisfying_bitmap(instance, partition.n_a, config.enum_cap);
    su.sol = satisfying_bitmap(instance, instance.n_ab, config.enum_cap);

    su.stage_a_hi = make_rank_one_uniform(su.dim_a);
    su.stage_a_hf = make_diagonal_marked(su.ok_a);

    // Stage B: H_i = I_A (x) (I_B - |s_B><s_B|); H_f = H_AB - H_A (x) I_B,
    // which is diagonal with ones exactly on {a in M_A, (a,b) not a solution}.
    su.stage_b_hi = make_tensor_extended(make_rank_one_uniform(su.dim_b), su.dim_a, 1);
    std::vector<std::uint8_t> b_marked(su.dim_ab);
    for (std::uint64_t i = 0; i < su.dim_ab; ++i) {
        const std::uint64_t a = i % su.dim_a;
        b_marked[i] = (su.sol[i] || !su.ok_a[a]) ? 1 : 0;
    }
    su.stage_b_hf = make_diagonal_marked(std::move(b_marked));

    su.h0 = make_rank_one_uniform(su.dim_ab);
    su.stage_c_hf = make_diagonal_marked(su.sol);

    const auto& c = su.census;
    su.plan.epsilon = config.epsilon;
    su.plan.partition = partition;

    if (c.m_a > 0) {
        const double a2_a = static_cast<double>(c.m_a) / static_cast<double>(su.dim_a);
        su.sched_a = stage_schedule(a2_a, config.grid_points, config.epsilon);
        su.plan.t_a = su.sched_a.total_time;
        su.plan.r_a = sized_steps(su.plan.t_a, config.r_mult_a, config.min_steps);

        // Eq-28 sizing: branches without extensions stay stationary, so the
        // min runs over M_{B/m_A} of the S branches only.
        const std::uint64_t min_ext = c.min_extensions_over_s();
        const double a2_b =
            min_ext == 0 ? 1.0 : static_cast<double>(min_ext) / static_cast<double>(su.dim_b);
        su.sched_b = stage_schedule(a2_b, config.grid_points, config.epsilon);
        su.plan.t_b = su.sched_b.total_time;
        su.plan.r_b = sized_steps(su.plan.t_b, config.r_mult_b, config.min_steps);

        if (c.m_a_s > 0) {
            const double a2_c = static_cast<double>(c.m_a_s) / static_cast<double>(c.m_a);
            su.sched_c = stage_schedule(a2_c, config.grid_points, config.epsilon);
            su.plan.t_c = su.sched_c.total_time;
            su.plan.r_c = sized_steps(su.plan.t_c, config.r_mult_c, config.min_steps);
            su.plan.rc_over_tc = static_cast<double>(su.plan.r_c) / su.plan.t_c;
        }
    }
    return su;
}

StageAResult stage_a(const NestedSetup& setup) {
    if (setup.census.m_a == 0)
        throw no_partial_solutions("stage A: no partial solutions, the gap closes");

    StateVector v0 = uniform_state(setup.instance.d, setup.partition.n_a);
    auto evo = evolve_discretized(setup.stage_a_hi, setup.stage_a_hf, setup.sched_a,
                                  setup.plan.r_a, std::move(v0), &setup.ok_a);

    // Fidelity to the uniform superposition over M_A, not just the mass.
    cplx overlap{0.0, 0.0};
    for (std::uint64_t a = 0; a < setup.dim_a; ++a)
        if (setup.ok_a[a]) overlap += evo.final_state.amp[a];
    const double fid = std::norm(overlap) / static_cast<double>(setup.census.m_a);

    StageAResult res;
    res.state = std::move(evo.final_state);
    res.fidelity = fid;
    res.schedule = setup.sched_a;
    res.steps = setup.plan.r_a;
    return res;
}

StageAResult stage_a(const CspInstance& instance, Partition partition, double epsilon,
                     std::uint64_t r_a) {
    NestedConfig cfg;
    cfg.epsilon = epsilon;
    auto setup = make_setup(instance, partition, cfg);
    if (r_a > 0) setup.plan.r_a = r_a;
    return stage_a(setup);
}

namespace {

// Per-branch targets: uniform over the branch's solution set for S
// branches, |s_B> for NS branches. Returns (overlap, mass) per prefix
// index a in M_A.
struct BranchOverlap {
    cplx overlap{0.0, 0.0};
    double mass = 0.0;
    std::uint64_t extensions = 0;
};

BranchOverlap branch_overlap(const NestedSetup& su, const StateVector& v, std::uint64_t a) {
    BranchOverlap out;
    std::uint64_t ext = 0;
    cplx sol_sum{0.0, 0.0}, all_sum{0.0, 0.0};
    for (std::uint64_t b = 0; b < su.dim_b; ++b) {
        const std::uint64_t i = a + su.dim_a * b;
        const cplx amp = v.amp[i];
        out.mass += std::norm(amp);
        all_sum += amp;
        if (su.sol[i]) {
            sol_sum += amp;
            ++ext;
        }
    }
    out.extensions = ext;
    if (ext > 0)
        out.overlap = sol_sum / std::sqrt(static_cast<double>(ext));
    else
        out.overlap = all_sum / std::sqrt(static_cast<double>(su.dim_b));
    return out;
}

} // namespace

StageBResult stage_b(const NestedSetup& setup, const StateVector& state_after_a) {
    if (state_after_a.dim() != setup.dim_a)
        throw input_error("stage B: input must live on the A register");

    // |psi_0>_AB = (stage-A state) (x) |s_B>
    StateVector v0;
    v0.amp.resize(setup.dim_ab);
    const double inv_sqrt_nb = 1.0 / std::sqrt(static_cast<double>(setup.dim_b));
    for (std::uint64_t b = 0; b < setup.dim_b; ++b)
        for (std::uint64_t a = 0; a < setup.dim_a; ++a)
            v0.amp[a + setup.dim_a * b] = state_after_a.amp[a] * inv_sqrt_nb;

    std::vector<double> mass_before(setup.dim_a, 0.0);
    for (std::uint64_t a = 0; a < setup.dim_a; ++a)
        mass_before[a] = std::norm(state_after_a.amp[a]);

    auto evo = evolve_discretized(setup.stage_b_hi, setup.stage_b_hf, setup.sched_b,
                                  setup.plan.r_b, std::move(v0));

    StageBResult res;
    res.schedule = setup.sched_b;
    res.steps = setup.plan.r_b;

    double weighted_overlap = 0.0;
    for (std::uint64_t a = 0; a < setup.dim_a; ++a) {
        if (!setup.ok_a[a]) continue;
        const auto bo = branch_overlap(setup, evo.final_state, a);
        BranchDiagnostic d;
        d.m_a = a;
        d.fidelity = bo.mass > 0.0 ? std::norm(bo.overlap) / bo.mass : 0.0;
        d.phase = std::arg(bo.overlap);
        d.mass_drift = std::abs(bo.mass - mass_before[a]);
        d.has_extension = bo.extensions > 0;
        res.branches.push_back(d);
        weighted_overlap += std::abs(bo.overlap);
    }
    // Overlap with the Eq-29 target carrying the measured branch phases:
    // each branch contributes 1/sqrt(M_A) times its own overlap magnitude.
    res.fidelity =
        weighted_overlap * weighted_overlap / static_cast<double>(setup.census.m_a);
    res.state = std::move(evo.final_state);
    return res;
}

StageBResult stage_b(const CspInstance& instance, Partition partition,
                     const StateVector& state_after_a, double epsilon, std::uint64_t r_b) {
    NestedConfig cfg;
    cfg.epsilon = epsilon;
    auto setup = make_setup(instance, partition, cfg);
    if (r_b > 0) setup.plan.r_b = r_b;
    return stage_b(setup, state_after_a);
}

ProgramPtr build_u(const NestedSetup& setup) {
    auto prog = std::make_shared<UnitaryProgram>();
    prog->factors.reserve(2 * (setup.plan.r_a + setup.plan.r_b));

    // Stage A factors, extended to act on the A digits of the full register.
    const auto hi_a = make_tensor_extended(setup.stage_a_hi, 1, setup.dim_b);
    const auto hf_a = make_tensor_extended(setup.stage_a_hf, 1, setup.dim_b);
    const double dt_a = setup.sched_a.total_time / static_cast<double>(setup.plan.r_a);
    for (std::uint64_t j = 1; j <= setup.plan.r_a; ++j) {
        const double s_j = setup.sched_a.s_at(static_cast<double>(j) * dt_a);
        prog->factors.push_back({hf_a, s_j * dt_a});
        prog->factors.push_back({hi_a, (1.0 - s_j) * dt_a});
    }

    const double dt_b = setup.sched_b.total_time / static_cast<double>(setup.plan.r_b);
    for (std::uint64_t j = 1; j <= setup.plan.r_b; ++j) {
        const double s_j = setup.sched_b.s_at(static_cast<double>(j) * dt_b);
        prog->factors.push_back({setup.stage_b_hf, s_j * dt_b});
        prog->factors.push_back({setup.stage_b_hi, (1.0 - s_j) * dt_b});
    }
    return prog;
}

ProgramPtr build_u(const CspInstance& instance, Partition partition, const StagePlan& plan) {
    NestedConfig cfg;
    cfg.epsilon = plan.epsilon;
    auto setup = make_setup(instance, partition, cfg);
    setup.plan = plan;
    return build_u(setup);
}

EvolutionResult stage_c(const NestedSetup& setup, ProgramPtr u) {
    if (setup.census.m_a == 0)
        throw no_partial_solutions("stage C: no partial solutions");
    if (setup.census.m_a_s == 0)
        throw unsatisfiable("stage C: no global solutions, the gap closes");

    const auto h_i = make_conjugated(std::move(u), setup.h0);
    StateVector v0 = uniform_state(setup.instance.d, setup.instance.n_ab);
    // The exact ground state of the conjugated initial Hamiltonian.
    std::get<StructuredHamiltonian::Conjugated>(h_i->node).u->apply_forward(v0);

    return evolve_discretized(h_i, setup.stage_c_hf, setup.sched_c, setup.plan.r_c,
                              std::move(v0), &setup.sol);
}

EvolutionResult stage_c(const CspInstance& instance, Partition partition, ProgramPtr u,
                        double epsilon, std::uint64_t r_c) {
    NestedConfig cfg;
    cfg.epsilon = epsilon;
    auto setup = make_setup(instance, partition, cfg);
    if (r_c > 0) {
        setup.plan.r_c = r_c;
        if (setup.plan.t_c > 0.0)
            setup.plan.rc_over_tc = static_cast<double>(r_c) / setup.plan.t_c;
    }
    return stage_c(setup, std::move(u));
}

NestedRunReport run_nested(const CspInstance& instance, Partition partition,
                           const NestedConfig& config) {
    auto setup = make_setup(instance, partition, config);

    NestedRunReport rep;
    rep.census = setup.census;
    rep.plan = setup.plan;

    auto a_res = stage_a(setup);
    rep.fidelity_after_a = a_res.fidelity;

    auto b_res = stage_b(setup, a_res.state);
    rep.fidelity_after_b = b_res.fidelity;
    for (const auto& br : b_res.branches) rep.branch_phases.emplace_back(br.m_a, br.phase);

    auto u = build_u(setup);
    auto c_res = stage_c(setup, u);

    rep.final_solution_mass = c_res.fidelity_to_ground;
    rep.histogram.resize(setup.dim_ab);
    for (std::uint64_t i = 0; i < setup.dim_ab; ++i)
        rep.histogram[i] = std::norm(c_res.final_state.amp[i]);
    rep.wall_time_model = (setup.plan.t_a + setup.plan.t_b) * static_cast<double>(setup.plan.r_c);
    return rep;
}

StateVector ideal_psi_ab(const NestedSetup& setup,
                         const std::vector<std::pair<std::uint64_t, double>>* phases) {
    StateVector psi;
    psi.amp.assign(setup.dim_ab, cplx{0.0, 0.0});
    const double w = 1.0 / std::sqrt(static_cast<double>(setup.census.m_a));
    std::vector<double> phase_of(setup.dim_a, 0.0);
    if (phases)
        for (const auto& [a, phi] : *phases) phase_of[a] = phi;

    for (const auto& [a, ext] : setup.census.m_b_given) {
        const cplx factor = std::polar(w, phase_of[a]);
        if (ext > 0) {
            const double inv = 1.0 / std::sqrt(static_cast<double>(ext));
            for (std::uint64_t b = 0; b < setup.dim_b; ++b) {
                const std::uint64_t i = a + setup.dim_a * b;
                if (setup.sol[i]) psi.amp[i] = factor * inv;
            }
        } else {
            const double inv = 1.0 / std::sqrt(static_cast<double>(setup.dim_b));
            for (std::uint64_t b = 0; b < setup.dim_b; ++b)
                psi.amp[a + setup.dim_a * b] = factor * inv;
        }
    }
    return psi;
}

} // namespace aqs
