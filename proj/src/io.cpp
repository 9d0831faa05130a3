#include "aqs/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace aqs {

json instance_to_json(const CspInstance& instance) {
    json j;
    j["d"] = instance.d;
    j["n_ab"] = instance.n_ab;
    j["k"] = instance.k;
    json cons = json::array();
    for (const auto& c : instance.constraints) {
        json jc;
        jc["vars"] = c.vars;
        json ngs = json::array();
        for (const auto& ng : c.nogoods) {
            json row = json::array();
            for (auto digit : ng) row.push_back(static_cast<int>(digit));
            ngs.push_back(std::move(row));
        }
        jc["nogoods"] = std::move(ngs);
        cons.push_back(std::move(jc));
    }
    j["constraints"] = std::move(cons);
    j["label"] = instance.label;
    return j;
}

CspInstance instance_from_json(const json& j) {
    for (const auto& [key, _] : j.items())
        if (key != "d" && key != "n_ab" && key != "k" && key != "constraints" && key != "label")
            throw input_error("instance json: unknown key '" + key + "'");
    CspInstance ins;
    try {
        ins.d = j.at("d").get<int>();
        ins.n_ab = j.at("n_ab").get<int>();
        ins.k = j.at("k").get<int>();
        for (const auto& jc : j.at("constraints")) {
            Constraint c;
            c.vars = jc.at("vars").get<std::vector<int>>();
            for (const auto& row : jc.at("nogoods")) {
                std::vector<std::uint8_t> ng;
                for (const auto& digit : row) {
                    const int v = digit.get<int>();
                    if (v < 0 || v > 255) throw input_error("instance json: bad digit");
                    ng.push_back(static_cast<std::uint8_t>(v));
                }
                c.nogoods.push_back(std::move(ng));
            }
            ins.constraints.push_back(std::move(c));
        }
        if (j.contains("label")) ins.label = j.at("label").get<std::string>();
    } catch (const json::exception& e) {
        throw input_error(std::string("instance json: ") + e.what());
    }
    ins.validate();
    return ins;
}

CspInstance load_instance_file(const std::filesystem::path& path, bool dimacs) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open instance file: " + path.string());
    if (dimacs) return read_dimacs(in);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw input_error("instance json parse failed: " + std::string(e.what()));
    }
    return instance_from_json(j);
}

void save_instance_file(const CspInstance& instance, const std::filesystem::path& path) {
    write_text_file(path, instance_to_json(instance).dump(2) + "\n");
}

json census_to_json(const SolutionCensus& census) {
    json j;
    j["m_a"] = census.m_a;
    j["m_ab"] = census.m_ab;
    j["m_a_s"] = census.m_a_s;
    j["m_a_ns"] = census.m_a_ns;
    json ext = json::object();
    for (const auto& [a, count] : census.m_b_given) ext[std::to_string(a)] = count;
    j["m_b_given"] = std::move(ext);
    return j;
}

json plan_to_json(const StagePlan& plan) {
    json j;
    j["t_a"] = plan.t_a;
    j["t_b"] = plan.t_b;
    j["t_c"] = plan.t_c;
    j["r_a"] = plan.r_a;
    j["r_b"] = plan.r_b;
    j["r_c"] = plan.r_c;
    j["epsilon"] = plan.epsilon;
    j["n_a"] = plan.partition.n_a;
    j["n_b"] = plan.partition.n_b;
    j["rc_over_tc"] = plan.rc_over_tc;
    return j;
}

json report_to_json(const NestedRunReport& report, const CspInstance& instance) {
    json j;
    j["instance_label"] = instance.label;
    j["census"] = census_to_json(report.census);
    j["plan"] = plan_to_json(report.plan);
    j["fidelity_after_a"] = report.fidelity_after_a;
    j["fidelity_after_b"] = report.fidelity_after_b;
    json phases = json::object();
    for (const auto& [a, phi] : report.branch_phases) phases[std::to_string(a)] = phi;
    j["branch_phases"] = std::move(phases);
    j["final_solution_mass"] = report.final_solution_mass;
    j["wall_time_model"] = report.wall_time_model;
    j["scheduling"] = "oracle-assisted"; // schedules sized from the exact census
    j["histogram"] = report.histogram;
    return j;
}

json error_budget_to_json(const ErrorBudget& eb) {
    json j;
    j["total_time"] = eb.total_time;
    j["steps"] = eb.steps;
    j["diff_norm"] = eb.diff_norm;
    j["comm_norm"] = eb.comm_norm;
    j["piecewise_bound"] = eb.piecewise_bound;
    j["trotter_bound_scale"] = eb.trotter_bound_scale;
    j["measured_piecewise"] = eb.measured_piecewise;
    j["measured_trotter"] = eb.measured_trotter;
    j["estimated"] = eb.estimated;
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string schedule_csv(const Schedule& schedule) {
    std::ostringstream out;
    out << "t,s\n";
    for (std::size_t i = 0; i < schedule.t_knots.size(); ++i)
        out << format_double(schedule.t_knots[i]) << ',' << format_double(schedule.s_knots[i])
            << '\n';
    return out.str();
}

std::string gap_profile_csv(const GapProfile& profile) {
    std::ostringstream out;
    out << "s,E0,E1,g,dmat\n";
    for (std::size_t i = 0; i < profile.s.size(); ++i)
        out << format_double(profile.s[i]) << ',' << format_double(profile.e0[i]) << ','
            << format_double(profile.e1[i]) << ',' << format_double(profile.gap[i]) << ','
            << format_double(profile.dmat[i]) << '\n';
    return out.str();
}

std::string histogram_csv(const NestedRunReport& report, const CspInstance& instance) {
    std::ostringstream out;
    out << "index,assignment,probability,is_solution\n";
    const auto sol_mask = satisfying_bitmap(instance, instance.n_ab);
    for (std::size_t i = 0; i < report.histogram.size(); ++i) {
        const auto digits = assignment_of_index(i, instance.d, instance.n_ab);
        out << i << ',';
        for (int v = 0; v < instance.n_ab; ++v) out << static_cast<int>(digits[static_cast<std::size_t>(v)]);
        out << ',' << format_double(report.histogram[i]) << ','
            << static_cast<int>(sol_mask[i]) << '\n';
    }
    return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write file: " + path.string());
    out << text;
}

} // namespace aqs
