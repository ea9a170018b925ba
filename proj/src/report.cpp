#include "netsbm/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace netsbm {

using nlohmann::json;

std::string family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::Crisp: return "crisp";
        case ModelFamily::Ellipsoidal: return "ellipsoidal";
        case ModelFamily::Polyhedral: return "polyhedral";
        case ModelFamily::Budget: return "budget";
    }
    return "?";
}

std::optional<ModelFamily> family_from_name(const std::string& name) {
    if (name == "crisp") return ModelFamily::Crisp;
    if (name == "ellipsoidal") return ModelFamily::Ellipsoidal;
    if (name == "polyhedral") return ModelFamily::Polyhedral;
    if (name == "budget") return ModelFamily::Budget;
    return std::nullopt;
}

const FamilyResult* EfficiencyReport::find(ModelFamily f) const {
    for (const auto& fam : families)
        if (fam.family == f) return &fam;
    return nullptr;
}

namespace {

std::string fmt_eff(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

constexpr ModelFamily kCsvFamilies[4] = {ModelFamily::Crisp, ModelFamily::Ellipsoidal,
                                         ModelFamily::Polyhedral, ModelFamily::Budget};

} // namespace

std::string format_p_value(double p) {
    if (p < 1e-6) return "<1e-06";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", p);
    return buf;
}

void write_report_csv(const EfficiencyReport& report, std::ostream& os) {
    os << "dmu";
    for (const char* scope : {"stage1", "stage2", "overall"})
        for (ModelFamily f : kCsvFamilies) os << ',' << scope << '_' << family_name(f);
    os << '\n';

    for (size_t i = 0; i < report.dmu_names.size(); ++i) {
        os << report.dmu_names[i];
        for (int scope = 0; scope < 3; ++scope) {
            for (ModelFamily f : kCsvFamilies) {
                os << ',';
                const FamilyResult* fam = report.find(f);
                if (!fam) continue;
                if (scope == 0 && fam->stage1[i].ok()) os << fmt_eff(fam->stage1[i].eff);
                if (scope == 1 && fam->stage2[i].ok()) os << fmt_eff(fam->stage2[i].eff);
                if (scope == 2 && fam->stage1[i].ok() && fam->stage2[i].ok())
                    os << fmt_eff(fam->overall[i]);
            }
        }
        os << '\n';
    }
}

void write_report_csv(const EfficiencyReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_report_csv(report, os);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

namespace {

json cell_to_json(const StageCell& c) {
    json j;
    j["status"] = c.status;
    if (c.ok()) {
        j["w"] = c.w;
        j["eff"] = c.eff;
        j["efficient"] = c.efficient;
        j["slacks"] = c.slacks;
        j["lambda"] = c.lambda;
    }
    if (!c.warnings.empty()) j["warnings"] = c.warnings;
    return j;
}

StageCell cell_from_json(const json& j) {
    StageCell c;
    c.status = j.at("status").get<std::string>();
    if (c.ok()) {
        c.w = j.at("w").get<double>();
        c.eff = j.at("eff").get<double>();
        c.efficient = j.at("efficient").get<bool>();
        c.slacks = j.at("slacks").get<std::map<std::string, double>>();
        c.lambda = j.at("lambda").get<std::map<std::string, double>>();
    }
    if (j.contains("warnings")) c.warnings = j.at("warnings").get<std::vector<std::string>>();
    return c;
}

json lowest_to_json(const std::optional<LowestEntry>& e) {
    if (!e) return nullptr;
    return json{{"dmu", e->dmu}, {"eff", e->eff}};
}

std::optional<LowestEntry> lowest_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return LowestEntry{j.at("dmu").get<std::string>(), j.at("eff").get<double>()};
}

} // namespace

void write_report_json(const EfficiencyReport& report, std::ostream& os) {
    json j;
    j["dmus"] = report.dmu_names;
    json fams = json::object();
    for (const auto& fam : report.families) {
        json jf;
        jf["stage1"] = json::array();
        jf["stage2"] = json::array();
        for (const auto& c : fam.stage1) jf["stage1"].push_back(cell_to_json(c));
        for (const auto& c : fam.stage2) jf["stage2"].push_back(cell_to_json(c));
        json ov = json::array();
        for (size_t i = 0; i < fam.overall.size(); ++i) {
            if (std::isfinite(fam.overall[i]))
                ov.push_back(json{{"eff", fam.overall[i]}, {"efficient", fam.overall_efficient[i] != false}});
            else
                ov.push_back(nullptr);
        }
        jf["overall"] = ov;
        jf["lowest_stage1"] = lowest_to_json(fam.lowest_stage1);
        jf["lowest_stage2"] = lowest_to_json(fam.lowest_stage2);
        jf["lowest_overall"] = lowest_to_json(fam.lowest_overall);
        fams[family_name(fam.family)] = jf;
    }
    j["families"] = fams;
    if (report.friedman) {
        j["friedman"] = {{"statistic", report.friedman->statistic},
                         {"df", report.friedman->df},
                         {"p_value", report.friedman->p_value},
                         {"scope", report.friedman_scope}};
    }
    if (!report.preprocessing_warnings.empty())
        j["preprocessing_warnings"] = report.preprocessing_warnings;
    os << j.dump(2) << '\n';
}

void write_report_json(const EfficiencyReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_report_json(report, os);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

EfficiencyReport read_report_json(std::istream& is) {
    json j = json::parse(is);
    EfficiencyReport report;
    report.dmu_names = j.at("dmus").get<std::vector<std::string>>();
    const size_t n = report.dmu_names.size();

    // Keep the canonical family order regardless of JSON key order.
    for (ModelFamily f : {ModelFamily::Crisp, ModelFamily::Ellipsoidal, ModelFamily::Polyhedral,
                          ModelFamily::Budget}) {
        const std::string key = family_name(f);
        if (!j.at("families").contains(key)) continue;
        const json& jf = j.at("families").at(key);
        FamilyResult fam;
        fam.family = f;
        for (const auto& c : jf.at("stage1")) fam.stage1.push_back(cell_from_json(c));
        for (const auto& c : jf.at("stage2")) fam.stage2.push_back(cell_from_json(c));
        if (fam.stage1.size() != n || fam.stage2.size() != n)
            throw std::runtime_error("report JSON: stage array size mismatch");
        for (const auto& o : jf.at("overall")) {
            if (o.is_null()) {
                fam.overall.push_back(std::numeric_limits<double>::quiet_NaN());
                fam.overall_efficient.push_back(false);
            } else {
                fam.overall.push_back(o.at("eff").get<double>());
                fam.overall_efficient.push_back(o.at("efficient").get<bool>());
            }
        }
        fam.lowest_stage1 = lowest_from_json(jf.at("lowest_stage1"));
        fam.lowest_stage2 = lowest_from_json(jf.at("lowest_stage2"));
        fam.lowest_overall = lowest_from_json(jf.at("lowest_overall"));
        report.families.push_back(std::move(fam));
    }
    if (j.contains("friedman")) {
        FriedmanResult fr;
        fr.statistic = j.at("friedman").at("statistic").get<double>();
        fr.df = j.at("friedman").at("df").get<int>();
        fr.p_value = j.at("friedman").at("p_value").get<double>();
        report.friedman = fr;
        report.friedman_scope = j.at("friedman").value("scope", "overall");
    }
    if (j.contains("preprocessing_warnings"))
        report.preprocessing_warnings =
            j.at("preprocessing_warnings").get<std::vector<std::string>>();
    return report;
}

EfficiencyReport read_report_json_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open report '" + path + "'");
    return read_report_json(is);
}

namespace {

bool cell_equal(const StageCell& a, const StageCell& b) {
    if (a.status != b.status || a.warnings != b.warnings) return false;
    if (!a.ok()) return true;
    return a.w == b.w && a.eff == b.eff && a.efficient == b.efficient && a.slacks == b.slacks &&
           a.lambda == b.lambda;
}

} // namespace

bool report_equal(const EfficiencyReport& a, const EfficiencyReport& b) {
    if (a.dmu_names != b.dmu_names || a.families.size() != b.families.size()) return false;
    if (a.preprocessing_warnings != b.preprocessing_warnings) return false;
    for (size_t f = 0; f < a.families.size(); ++f) {
        const auto& fa = a.families[f];
        const auto& fb = b.families[f];
        if (fa.family != fb.family) return false;
        for (size_t i = 0; i < a.dmu_names.size(); ++i) {
            if (!cell_equal(fa.stage1[i], fb.stage1[i]) || !cell_equal(fa.stage2[i], fb.stage2[i]))
                return false;
            bool fin_a = std::isfinite(fa.overall[i]);
            bool fin_b = std::isfinite(fb.overall[i]);
            if (fin_a != fin_b) return false;
            if (fin_a && (fa.overall[i] != fb.overall[i] ||
                          fa.overall_efficient[i] != fb.overall_efficient[i]))
                return false;
        }
    }
    bool fa = a.friedman.has_value(), fb = b.friedman.has_value();
    if (fa != fb) return false;
    if (fa && (a.friedman->statistic != b.friedman->statistic || a.friedman->df != b.friedman->df ||
               a.friedman->p_value != b.friedman->p_value))
        return false;
    return true;
}

FriedmanResult friedman_over_report(const EfficiencyReport& report,
                                    const std::vector<ModelFamily>& families,
                                    const std::string& scope) {
    if (families.size() < 2) throw StatsError("Friedman comparison needs at least 2 families");
    std::vector<const FamilyResult*> fams;
    for (ModelFamily f : families) {
        const FamilyResult* fr = report.find(f);
        if (!fr) throw StatsError("family '" + family_name(f) + "' is not in the report");
        fams.push_back(fr);
    }
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < report.dmu_names.size(); ++i) {
        std::vector<double> row;
        bool complete = true;
        for (const FamilyResult* fr : fams) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (scope == "stage1") {
                if (fr->stage1[i].ok()) v = fr->stage1[i].eff;
            } else if (scope == "stage2") {
                if (fr->stage2[i].ok()) v = fr->stage2[i].eff;
            } else if (scope == "overall") {
                if (fr->stage1[i].ok() && fr->stage2[i].ok()) v = fr->overall[i];
            } else {
                throw StatsError("unknown Friedman scope '" + scope + "'");
            }
            if (!std::isfinite(v)) {
                complete = false;
                break;
            }
            row.push_back(v);
        }
        if (complete) rows.push_back(std::move(row));
    }
    if (rows.size() < 2)
        throw StatsError("fewer than 2 DMUs are complete across the compared families");
    return friedman_test(rows);
}

} // namespace netsbm
