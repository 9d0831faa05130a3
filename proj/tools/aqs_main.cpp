// Command-line driver: instance generation and ingestion, nested runs,
// scaling sweeps, discretization-bound verification, census queries.
//
// Exit codes are a stable contract:
//   0 ok, 2 usage/input, 3 unsatisfiable, 4 no partial solutions, 5 resource.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "aqs/analysis.hpp"
#include "aqs/io.hpp"
#include "aqs/nested.hpp"

namespace fs = std::filesystem;
using aqs::json;

namespace {

struct CliConfig {
    double epsilon = 0.1;
    double r_mult_a = 4.0;
    double r_mult_b = 4.0;
    double r_mult_c = 4.0;
    std::uint64_t min_steps = 4;
    std::size_t grid_points = 1025;
    int enum_cap_log2 = 24;
    int dense_cap_log2 = 12;
    std::string partition = "auto";
    double beta_c = 4.25;
    std::uint64_t seed = 1;
    std::string out_dir;
    bool emit_json = true;
    bool emit_csv = true;

    aqs::NestedConfig nested() const {
        aqs::NestedConfig n;
        n.epsilon = epsilon;
        n.r_mult_a = r_mult_a;
        n.r_mult_b = r_mult_b;
        n.r_mult_c = r_mult_c;
        n.min_steps = min_steps;
        n.grid_points = grid_points;
        n.enum_cap = std::uint64_t(1) << enum_cap_log2;
        return n;
    }
};

const char* kConfigKeys[] = {"epsilon",       "r_mult_a",   "r_mult_b",  "r_mult_c",
                             "min_steps",     "grid_points", "enum_cap_log2",
                             "dense_cap_log2", "partition",  "beta_c",    "seed",
                             "out_dir",       "emit"};

CliConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw aqs::input_error("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw aqs::input_error("config parse failed: " + std::string(e.what()));
    }
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : kConfigKeys)
            if (key == k) known = true;
        if (!known) throw aqs::input_error("config: unknown key '" + key + "'");
    }
    CliConfig c;
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("r_mult_a")) c.r_mult_a = j["r_mult_a"].get<double>();
    if (j.contains("r_mult_b")) c.r_mult_b = j["r_mult_b"].get<double>();
    if (j.contains("r_mult_c")) c.r_mult_c = j["r_mult_c"].get<double>();
    if (j.contains("min_steps")) c.min_steps = j["min_steps"].get<std::uint64_t>();
    if (j.contains("grid_points")) c.grid_points = j["grid_points"].get<std::size_t>();
    if (j.contains("enum_cap_log2")) c.enum_cap_log2 = j["enum_cap_log2"].get<int>();
    if (j.contains("dense_cap_log2")) c.dense_cap_log2 = j["dense_cap_log2"].get<int>();
    if (j.contains("partition")) {
        const auto& p = j["partition"];
        c.partition = p.is_string() ? p.get<std::string>() : std::to_string(p.get<int>());
    }
    if (j.contains("beta_c")) c.beta_c = j["beta_c"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("emit")) {
        c.emit_json = c.emit_csv = false;
        for (const auto& f : j["emit"]) {
            const auto s = f.get<std::string>();
            if (s == "json")
                c.emit_json = true;
            else if (s == "csv")
                c.emit_csv = true;
            else
                throw aqs::input_error("config: unknown emit format '" + s + "'");
        }
    }
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
        throw aqs::input_error("config: epsilon must be in (0,1)");
    if (c.beta_c <= 0.0) throw aqs::input_error("config: beta_c must be positive");
    return c;
}

json config_to_json(const CliConfig& c, int resolved_n_a) {
    json j;
    j["epsilon"] = c.epsilon;
    j["r_mult_a"] = c.r_mult_a;
    j["r_mult_b"] = c.r_mult_b;
    j["r_mult_c"] = c.r_mult_c;
    j["min_steps"] = c.min_steps;
    j["grid_points"] = c.grid_points;
    j["enum_cap_log2"] = c.enum_cap_log2;
    j["dense_cap_log2"] = c.dense_cap_log2;
    j["partition"] = c.partition;
    j["resolved_n_a"] = resolved_n_a;
    j["beta_c"] = c.beta_c;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    json emit = json::array();
    if (c.emit_json) emit.push_back("json");
    if (c.emit_csv) emit.push_back("csv");
    j["emit"] = std::move(emit);
    return j;
}

std::string default_out_dir() {
    if (const char* env = std::getenv("AQS_OUT_DIR")) return env;
    return ".";
}

void write_meta(const fs::path& base, const std::string& command) {
    const auto now = std::chrono::system_clock::now();
    const auto tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    json meta;
    meta["command"] = command;
    meta["timestamp"] = buf;
    aqs::write_text_file(fs::path(base.string() + ".meta.json"), meta.dump(2) + "\n");
}

int resolve_partition(const CliConfig& cfg, const aqs::CspInstance& ins) {
    if (cfg.partition != "auto") {
        int n_a = 0;
        try {
            n_a = std::stoi(cfg.partition);
        } catch (...) {
            throw aqs::input_error("partition must be 'auto' or an integer");
        }
        if (n_a < 1 || n_a >= ins.n_ab)
            throw aqs::input_error("partition n_a must be in [1, n_ab-1]");
        return n_a;
    }
    const double ratio = aqs::beta_of(ins) / cfg.beta_c;
    return aqs::optimal_partition(ins.n_ab, std::max(1, ins.k), ratio);
}

// ---------------------------------------------------------------- generate

int cmd_generate(int n, int clauses, int k, std::uint64_t seed, const std::string& out) {
    const auto ins = aqs::generate_random_ksat(n, clauses, k, seed);
    aqs::save_instance_file(ins, out);
    std::cout << "wrote " << out << "  xi=" << ins.nogood_count()
              << "  beta=" << aqs::beta_of(ins) << "\n";
    return 0;
}

// ------------------------------------------------------------------ census

int cmd_census(const std::string& instance_path, bool dimacs, const CliConfig& cfg,
               const std::string& out) {
    const auto ins = aqs::load_instance_file(instance_path, dimacs);
    const int n_a = resolve_partition(cfg, ins);
    const auto cen =
        aqs::census(ins, {n_a, ins.n_ab - n_a}, std::uint64_t(1) << cfg.enum_cap_log2);
    json j;
    j["n_a"] = n_a;
    j["beta"] = aqs::beta_of(ins);
    j["census"] = aqs::census_to_json(cen);
    const auto text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        aqs::write_text_file(out, text);
    return 0;
}

// --------------------------------------------------------------------- run

int cmd_run(const std::string& instance_path, bool dimacs, const CliConfig& cfg,
            const std::string& prefix_arg) {
    const auto ins = aqs::load_instance_file(instance_path, dimacs);
    const int n_a = resolve_partition(cfg, ins);
    const auto report = aqs::run_nested(ins, {n_a, ins.n_ab - n_a}, cfg.nested());

    const fs::path dir = cfg.out_dir.empty() ? default_out_dir() : cfg.out_dir;
    const std::string stem =
        prefix_arg.empty() ? fs::path(instance_path).stem().string() : prefix_arg;
    const fs::path base = dir / stem;

    if (cfg.emit_json) {
        json j;
        j["config"] = config_to_json(cfg, n_a);
        j["report"] = aqs::report_to_json(report, ins);
        aqs::write_text_file(fs::path(base.string() + ".report.json"), j.dump(2) + "\n");
    }
    if (cfg.emit_csv)
        aqs::write_text_file(fs::path(base.string() + ".histogram.csv"),
                             aqs::histogram_csv(report, ins));
    write_meta(base, "run");

    std::cout << "n_a=" << n_a << "  M_A=" << report.census.m_a
              << "  M_AB=" << report.census.m_ab
              << "  fidelity_a=" << report.fidelity_after_a
              << "  fidelity_b=" << report.fidelity_after_b
              << "  solution_mass=" << report.final_solution_mass
              << "  T_model=" << report.wall_time_model << "\n";
    return 0;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& instance_path, bool dimacs, const CliConfig& cfg,
               std::uint64_t r_override, const std::string& out) {
    const auto ins = aqs::load_instance_file(instance_path, dimacs);
    const int n_a = resolve_partition(cfg, ins);
    auto setup = aqs::make_setup(ins, {n_a, ins.n_ab - n_a}, cfg.nested());
    if (setup.census.m_a == 0) throw aqs::no_partial_solutions("verify: M_A = 0");
    if (setup.census.m_a_s == 0) throw aqs::unsatisfiable("verify: no global solutions");

    const std::size_t dense_cap = std::size_t(1) << cfg.dense_cap_log2;
    if (setup.dim_ab > dense_cap)
        throw aqs::resource_error("verify: instance exceeds the dense cap");

    // Stage-C pair with the idealized initial Hamiltonian (exact psi_AB).
    const auto psi = aqs::ideal_psi_ab(setup);
    const auto h_i = aqs::make_rank_one_state(psi.amp);
    const auto h_f = setup.stage_c_hf;
    const std::uint64_t r = r_override ? r_override : setup.plan.r_c;
    const auto eb = aqs::error_budget(h_i, h_f, setup.sched_c, r, dense_cap);

    const double mas_over_ma =
        std::sqrt(static_cast<double>(setup.census.m_a_s) / static_cast<double>(setup.census.m_a));

    std::ostringstream table;
    table << "quantity,value,bound,ok\n";
    table << "diff_norm," << aqs::format_double(eb.diff_norm) << ",1,"
          << (eb.diff_norm < 1.0 ? 1 : 0) << "\n";
    table << "comm_norm," << aqs::format_double(eb.comm_norm) << ","
          << aqs::format_double(mas_over_ma) << "," << (eb.comm_norm < mas_over_ma ? 1 : 0)
          << "\n";
    table << "piecewise," << aqs::format_double(eb.measured_piecewise) << ","
          << aqs::format_double(eb.piecewise_bound)
          << "," << (eb.measured_piecewise <= eb.piecewise_bound ? 1 : 0) << "\n";
    table << "trotter," << aqs::format_double(eb.measured_trotter) << ","
          << aqs::format_double(10.0 * eb.trotter_bound_scale) << ","
          << (eb.measured_trotter <= 10.0 * eb.trotter_bound_scale ? 1 : 0) << "\n";

    std::cout << "T_C=" << eb.total_time << " r=" << eb.steps
              << (eb.estimated ? " (norms estimated on random states)" : "") << "\n"
              << table.str();

    if (!out.empty()) {
        json j;
        j["config"] = config_to_json(cfg, n_a);
        j["budget"] = aqs::error_budget_to_json(eb);
        j["comm_bound"] = mas_over_ma;
        aqs::write_text_file(out, j.dump(2) + "\n");
        write_meta(fs::path(out), "verify");
    }
    const bool all_ok = eb.diff_norm < 1.0 && eb.comm_norm < mas_over_ma &&
                        eb.measured_piecewise <= eb.piecewise_bound &&
                        eb.measured_trotter <= 10.0 * eb.trotter_bound_scale;
    return all_ok ? 0 : 1;
}

// ------------------------------------------------------------------- sweep

struct SweepRow {
    double value = 0.0;
    double mean_time = 0.0;
    double mean_fidelity = 0.0;
    double mean_trotter = 0.0;
    int failures = 0;
    bool ok = true;
};

SweepRow sweep_point(const std::string& axis, double value, const CliConfig& base, int k,
                     double beta, int n_ab, int instances, std::uint64_t point_seed) {
    SweepRow row;
    row.value = value;

    if (axis == "N") {
        const auto n_states = static_cast<std::uint64_t>(value);
        row.mean_time = aqs::time_for_unstructured(n_states, 1, base.epsilon, base.grid_points);
        const auto grid = aqs::uniform_grid(base.grid_points);
        const auto profile = aqs::two_level_profile(1.0 / static_cast<double>(n_states), grid);
        const auto sched = aqs::local_schedule(profile, base.epsilon);
        std::vector<std::uint8_t> marked(n_states, 0);
        marked[0] = 1;
        const auto h_i = aqs::make_rank_one_uniform(n_states);
        const auto h_f = aqs::make_diagonal_marked(marked);
        const auto r = std::max<std::uint64_t>(
            base.min_steps,
            static_cast<std::uint64_t>(std::ceil(base.r_mult_c * sched.total_time)));
        auto v0 = aqs::uniform_state(2, 0);
        v0.amp.assign(n_states, aqs::cplx{1.0 / std::sqrt(static_cast<double>(n_states)), 0.0});
        const auto evo = aqs::evolve_discretized(h_i, h_f, sched, r, std::move(v0), &marked);
        row.mean_fidelity = evo.fidelity_to_ground;
        return row;
    }

    if (axis == "r") {
        const std::uint64_t n_states = 64;
        std::vector<std::uint8_t> marked(n_states, 0);
        marked[0] = 1;
        const auto h_i = aqs::make_rank_one_uniform(n_states);
        const auto h_f = aqs::make_diagonal_marked(marked);
        const auto grid = aqs::uniform_grid(base.grid_points);
        const auto sched = aqs::local_schedule(
            aqs::two_level_profile(1.0 / static_cast<double>(n_states), grid), base.epsilon);
        const auto eb = aqs::error_budget(h_i, h_f, sched, static_cast<std::uint64_t>(value),
                                          std::size_t(1) << base.dense_cap_log2);
        row.mean_time = eb.total_time;
        row.mean_trotter = eb.measured_trotter;
        row.mean_fidelity = 1.0 - eb.measured_piecewise;
        return row;
    }

    // Instance-ensemble axes: n_ab, beta, epsilon.
    CliConfig cfg = base;
    int n = n_ab;
    double clause_density = beta;
    if (axis == "n_ab")
        n = static_cast<int>(value);
    else if (axis == "beta")
        clause_density = value;
    else if (axis == "epsilon")
        cfg.epsilon = value;
    else
        throw aqs::input_error("sweep: unknown axis '" + axis + "'");

    const int clauses = static_cast<int>(std::lround(clause_density * n));
    int done = 0;
    double sum_t = 0.0, sum_f = 0.0;
    for (int i = 0; i < instances; ++i) {
        const std::uint64_t seed = point_seed + static_cast<std::uint64_t>(i);
        try {
            const auto ins = aqs::generate_random_ksat(n, clauses, k, seed);
            const int n_a = resolve_partition(cfg, ins);
            const auto rep = aqs::run_nested(ins, {n_a, ins.n_ab - n_a}, cfg.nested());
            sum_t += rep.wall_time_model;
            sum_f += rep.final_solution_mass;
            ++done;
        } catch (const std::exception&) {
            ++row.failures; // unsats and closed gaps are counted, not fatal
        }
    }
    if (done == 0) {
        row.ok = false;
        return row;
    }
    row.mean_time = sum_t / done;
    row.mean_fidelity = sum_f / done;
    return row;
}

int cmd_sweep(const std::string& spec_path, const CliConfig& flags_cfg, int jobs,
              const std::string& out) {
    std::ifstream in(spec_path);
    if (!in) throw aqs::input_error("cannot open sweep spec: " + spec_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw aqs::input_error("sweep spec parse failed: " + std::string(e.what()));
    }
    for (const auto& [key, _] : j.items())
        if (key != "axis" && key != "values" && key != "instances_per_point" && key != "base" &&
            key != "k" && key != "beta" && key != "n_ab")
            throw aqs::input_error("sweep spec: unknown key '" + key + "'");

    const auto axis = j.at("axis").get<std::string>();
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() < 2) throw aqs::input_error("sweep spec: need at least 2 axis values");
    const int instances = j.value("instances_per_point", 1);
    if (instances < 1) throw aqs::input_error("sweep spec: instances_per_point must be >= 1");
    const int k = j.value("k", 3);
    const double beta = j.value("beta", 3.0);
    const int n_ab = j.value("n_ab", 10);

    CliConfig base = flags_cfg;
    if (j.contains("base")) {
        // base block uses the same schema as a config file
        const auto tmp = fs::temp_directory_path() / "aqs_sweep_base.json";
        aqs::write_text_file(tmp, j["base"].dump());
        base = load_config(tmp);
        fs::remove(tmp);
    }

    std::vector<SweepRow> rows(values.size());
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= values.size()) return;
                idx = next++;
            }
            const std::uint64_t point_seed =
                base.seed + 1000003ULL * static_cast<std::uint64_t>(idx);
            try {
                rows[idx] =
                    sweep_point(axis, values[idx], base, k, beta, n_ab, instances, point_seed);
            } catch (const std::exception&) {
                rows[idx].value = values[idx];
                rows[idx].ok = false;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ostringstream csv;
    csv << "axis_value,mean_time,mean_fidelity,mean_trotter_error,failures,status\n";
    int warnings = 0;
    std::vector<std::pair<double, double>> fit_points;
    for (const auto& row : rows) {
        csv << aqs::format_double(row.value) << ',';
        if (row.ok) {
            csv << aqs::format_double(row.mean_time) << ',' << aqs::format_double(row.mean_fidelity)
                << ',' << aqs::format_double(row.mean_trotter) << ',' << row.failures << ",ok\n";
            if (row.mean_time > 0.0 && row.value > 0.0)
                fit_points.emplace_back(row.value, row.mean_time);
            warnings += row.failures;
        } else {
            csv << ",,," << row.failures << ",failed\n";
            ++warnings;
        }
    }
    if (fit_points.size() >= 4) {
        const auto fit = aqs::fit_scaling(fit_points);
        csv << "fit," << aqs::format_double(fit.exponent) << ",,"
            << aqs::format_double(fit.residual) << ",,\n";
    } else {
        csv << "fit,,,,,insufficient\n";
    }

    if (out.empty())
        std::cout << csv.str();
    else {
        aqs::write_text_file(out, csv.str());
        write_meta(fs::path(out), "sweep");
    }
    if (warnings > 0) std::cerr << "sweep: " << warnings << " warning(s)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nested adiabatic search simulator"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a random k-SAT instance (native JSON)");
    int gen_n = 10, gen_clauses = 42, gen_k = 3;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "instance.json";
    gen->add_option("--n", gen_n, "variable count")->required();
    gen->add_option("--clauses", gen_clauses, "clause count")->required();
    gen->add_option("--k", gen_k, "literals per clause");
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--out", gen_out, "output path")->required();

    // shared instance/config flags for the remaining commands
    struct Common {
        std::string instance;
        bool dimacs = false;
        std::string config;
        std::string partition;
        double epsilon = -1.0;
        std::uint64_t seed = 0;
        bool seed_set = false;
    };
    auto add_common = [&](CLI::App* cmd, Common& c) {
        cmd->add_option("--instance", c.instance, "instance file (native JSON)")->required();
        cmd->add_flag("--dimacs", c.dimacs, "treat the instance file as DIMACS CNF");
        cmd->add_option("--config", c.config, "JSON config file");
        cmd->add_option("--na", c.partition, "partition size n_a or 'auto'");
        cmd->add_option("--epsilon", c.epsilon, "adiabaticity budget");
    };
    auto resolve_cfg = [&](const Common& c) {
        CliConfig cfg = c.config.empty() ? CliConfig{} : load_config(c.config);
        if (!c.partition.empty()) cfg.partition = c.partition;
        if (c.epsilon > 0.0) cfg.epsilon = c.epsilon;
        if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
        return cfg;
    };

    auto* cen = app.add_subcommand("census", "exact solution census of an instance");
    Common cen_c;
    std::string cen_out;
    add_common(cen, cen_c);
    cen->add_option("--out", cen_out, "write JSON here instead of stdout");

    auto* run = app.add_subcommand("run", "full nested run; writes report and histogram");
    Common run_c;
    std::string run_prefix, run_outdir;
    add_common(run, run_c);
    run->add_option("--out-prefix", run_prefix, "output file stem (default: instance stem)");
    run->add_option("--out-dir", run_outdir, "output directory (default: $AQS_OUT_DIR or .)");

    auto* ver = app.add_subcommand("verify", "discretization error bounds for the stage-C pair");
    Common ver_c;
    std::uint64_t ver_r = 0;
    std::string ver_out;
    add_common(ver, ver_c);
    ver->add_option("--r", ver_r, "step count override");
    ver->add_option("--out", ver_out, "write JSON report here");

    auto* swp = app.add_subcommand("sweep", "run a parameter sweep from a spec file");
    std::string swp_spec, swp_out, swp_config;
    int swp_jobs = 1;
    swp->add_option("--spec", swp_spec, "sweep spec JSON")->required();
    swp->add_option("--out", swp_out, "CSV output path (default stdout)");
    swp->add_option("--config", swp_config, "JSON config file for the base point");
    swp->add_option("--jobs", swp_jobs, "worker pool size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_n, gen_clauses, gen_k, gen_seed, gen_out);
        if (cen->parsed()) return cmd_census(cen_c.instance, cen_c.dimacs, resolve_cfg(cen_c), cen_out);
        if (run->parsed()) {
            auto cfg = resolve_cfg(run_c);
            if (!run_outdir.empty()) cfg.out_dir = run_outdir;
            return cmd_run(run_c.instance, run_c.dimacs, cfg, run_prefix);
        }
        if (ver->parsed())
            return cmd_verify(ver_c.instance, ver_c.dimacs, resolve_cfg(ver_c), ver_r, ver_out);
        if (swp->parsed()) {
            CliConfig cfg = swp_config.empty() ? CliConfig{} : load_config(swp_config);
            return cmd_sweep(swp_spec, cfg, swp_jobs, swp_out);
        }
    } catch (const aqs::unsatisfiable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const aqs::no_partial_solutions& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const aqs::resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const aqs::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const aqs::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
