#pragma once

#include "netsbm/sbm.hpp"
#include "netsbm/stats.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace netsbm {

enum class ModelFamily { Crisp, Ellipsoidal, Polyhedral, Budget };

std::string family_name(ModelFamily f);
std::optional<ModelFamily> family_from_name(const std::string& name);

/// One solved stage of one DMU under one model family.
struct StageCell {
    std::string status = "unsolved"; // optimal | infeasible | unbounded | numerical_failure | error
    double w = 0.0;
    double eff = 0.0;
    bool efficient = false;
    std::map<std::string, double> slacks;
    std::map<std::string, double> lambda;
    std::vector<std::string> warnings;

    bool ok() const { return status == "optimal"; }
};

struct LowestEntry {
    std::string dmu;
    double eff = 0.0;
};

struct FamilyResult {
    ModelFamily family = ModelFamily::Crisp;
    std::vector<StageCell> stage1;
    std::vector<StageCell> stage2;
    std::vector<double> overall; // stage1.eff * stage2.eff; NaN when either failed
    std::vector<bool> overall_efficient;
    std::optional<LowestEntry> lowest_stage1; // argmin over non-failed DMUs
    std::optional<LowestEntry> lowest_stage2;
    std::optional<LowestEntry> lowest_overall;
};

struct EfficiencyReport {
    std::vector<std::string> dmu_names;
    std::vector<FamilyResult> families; // canonical order: crisp, ellipsoidal, polyhedral, budget
    std::optional<FriedmanResult> friedman;
    std::string friedman_scope; // overall | stage1 | stage2
    std::vector<std::string> preprocessing_warnings;

    const FamilyResult* find(ModelFamily f) const;
};

/// Table-style CSV: header plus one row per DMU with 13 columns
/// (dmu; stage-1 x 4 families; stage-2 x 4; overall x 4), blanks for
/// families that were not run or cells that failed. Byte-stable.
void write_report_csv(const EfficiencyReport& report, std::ostream& os);
void write_report_csv(const EfficiencyReport& report, const std::string& path);

/// Lossless JSON dump (slacks, intensities, statuses, warnings included).
void write_report_json(const EfficiencyReport& report, std::ostream& os);
void write_report_json(const EfficiencyReport& report, const std::string& path);
EfficiencyReport read_report_json(std::istream& is);
EfficiencyReport read_report_json_file(const std::string& path);

bool report_equal(const EfficiencyReport& a, const EfficiencyReport& b);

/// Friedman over the report: one value per (complete DMU, selected family).
/// scope is "overall", "stage1" or "stage2"; DMUs with any failed cell among
/// the selected families are dropped (the test needs complete blocks).
FriedmanResult friedman_over_report(const EfficiencyReport& report,
                                    const std::vector<ModelFamily>& families,
                                    const std::string& scope);

/// Pretty p-value with the reporting floor: below 1e-6 prints "<1e-06".
std::string format_p_value(double p);

} // namespace netsbm
