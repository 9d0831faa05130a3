#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "aqs/csp.hpp"
#include "aqs/evolve.hpp"
#include "aqs/hilbert.hpp"
#include "aqs/nested.hpp"
#include "aqs/schedule.hpp"

namespace aqs {

using json = nlohmann::ordered_json;

// Native instance format:
// {d, n_ab, k, constraints:[{vars:[...], nogoods:[[...]]}], label}
json instance_to_json(const CspInstance& instance);
CspInstance instance_from_json(const json& j);

CspInstance load_instance_file(const std::filesystem::path& path, bool dimacs);
void save_instance_file(const CspInstance& instance, const std::filesystem::path& path);

json census_to_json(const SolutionCensus& census);
json plan_to_json(const StagePlan& plan);
json report_to_json(const NestedRunReport& report, const CspInstance& instance);
json error_budget_to_json(const ErrorBudget& eb);

// CSV emitters. All files use a header row, comma separators, '.' decimals
// and LF line endings; doubles print with 17 significant digits so files
// round-trip bit-exactly.
std::string format_double(double v);
std::string schedule_csv(const Schedule& schedule);
std::string gap_profile_csv(const GapProfile& profile);
std::string histogram_csv(const NestedRunReport& report, const CspInstance& instance);

void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace aqs
