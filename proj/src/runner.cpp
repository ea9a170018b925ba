#include "netsbm/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace netsbm {

using nlohmann::json;

namespace {

ColumnRole role_from_string(const std::string& s) {
    if (s == "input") return ColumnRole::Input;
    if (s == "intermediate") return ColumnRole::Intermediate;
    if (s == "desirable") return ColumnRole::Desirable;
    if (s == "undesirable") return ColumnRole::Undesirable;
    throw ConfigError("unknown column role '" + s + "'");
}

PolyhedralFamily family_from_json(const json& j) {
    PolyhedralFamily f;
    f.h = j.at("H").get<std::vector<std::vector<double>>>();
    f.q = j.at("q").get<std::vector<double>>();
    return f;
}

double get_scoped(const json& j, const char* fam, double fallback) {
    if (j.is_number()) return j.get<double>();
    if (j.is_object() && j.contains(fam)) return j.at(fam).get<double>();
    return fallback;
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        const json& jp = j.at("panel");
        cfg.panel_path = jp.at("path").get<std::string>();
        cfg.schema.name_column = jp.at("name_column").get<std::string>();
        std::string delim = jp.value("delimiter", ",");
        if (delim == "tab" || delim == "\t")
            cfg.schema.delimiter = '\t';
        else if (delim == ",")
            cfg.schema.delimiter = ',';
        else
            throw ConfigError("delimiter must be \",\" or \"tab\"");
        for (const auto& [col, role] : jp.at("roles").items())
            cfg.schema.roles[col] = role_from_string(role.get<std::string>());

        if (j.contains("preprocess")) {
            const json& pp = j.at("preprocess");
            std::string imp = pp.value("imputer", "column_mean");
            if (imp == "column_mean")
                cfg.impute.strategy = Imputer::ColumnMean;
            else if (imp == "regression")
                cfg.impute.strategy = Imputer::LinearRegressionOnComplete;
            else
                throw ConfigError("imputer must be column_mean or regression");
            cfg.impute.predictor = pp.value("regression_predictor", "");
            cfg.epsilon_shift = pp.value("epsilon_shift", 1.0);
            if (!(cfg.epsilon_shift > 0.0)) throw ConfigError("epsilon_shift must be > 0");
        }

        cfg.families.clear();
        for (const auto& f : j.at("families")) {
            auto fam = family_from_name(f.get<std::string>());
            if (!fam) throw ConfigError("unknown family '" + f.get<std::string>() + "'");
            if (std::find(cfg.families.begin(), cfg.families.end(), *fam) != cfg.families.end())
                throw ConfigError("family '" + family_name(*fam) + "' listed twice");
            cfg.families.push_back(*fam);
        }
        if (cfg.families.empty()) throw ConfigError("at least one model family must be selected");

        if (j.contains("uncertainty")) {
            const json& ju = j.at("uncertainty");
            if (ju.contains("layers")) {
                const json& jl = ju.at("layers");
                if (jl.contains("percent_of_nominal"))
                    cfg.uncertainty.layer_fractions =
                        jl.at("percent_of_nominal").get<std::vector<double>>();
                else
                    throw ConfigError("layers block must define percent_of_nominal");
            }
            if (ju.contains("ellipsoidal")) {
                const json& je = ju.at("ellipsoidal").contains("omega") ? ju.at("ellipsoidal").at("omega")
                                                                        : ju.at("ellipsoidal");
                cfg.uncertainty.omega_inputs = get_scoped(je, "inputs", 1.0);
                cfg.uncertainty.omega_intermediates = get_scoped(je, "intermediates", 1.0);
                cfg.uncertainty.omega_desirable = get_scoped(je, "desirable", 1.0);
                cfg.uncertainty.omega_undesirable = get_scoped(je, "undesirable", 1.0);
            }
            if (ju.contains("budget")) {
                const json& jb = ju.at("budget").contains("gamma") ? ju.at("budget").at("gamma")
                                                                   : ju.at("budget");
                cfg.uncertainty.gamma_inputs = get_scoped(jb, "inputs", 1.0);
                cfg.uncertainty.gamma_intermediates = get_scoped(jb, "intermediates", 1.0);
                cfg.uncertainty.gamma_desirable = get_scoped(jb, "desirable", 1.0);
                cfg.uncertainty.gamma_undesirable = get_scoped(jb, "undesirable", 1.0);
            }
            if (ju.contains("polyhedral")) {
                const json& jp2 = ju.at("polyhedral");
                if (jp2.contains("inputs"))
                    cfg.uncertainty.polyhedral.inputs = family_from_json(jp2.at("inputs"));
                if (jp2.contains("intermediates"))
                    cfg.uncertainty.polyhedral.intermediates =
                        family_from_json(jp2.at("intermediates"));
                if (jp2.contains("desirable"))
                    cfg.uncertainty.polyhedral.desirable = family_from_json(jp2.at("desirable"));
                if (jp2.contains("undesirable"))
                    cfg.uncertainty.polyhedral.undesirable = family_from_json(jp2.at("undesirable"));
            }
        }

        if (j.contains("solver")) {
            const json& js = j.at("solver");
            cfg.solver.tol_feas = js.value("tol_feas", cfg.solver.tol_feas);
            cfg.solver.tol_obj = js.value("tol_obj", cfg.solver.tol_obj);
            cfg.solver.max_iter = js.value("max_iter", cfg.solver.max_iter);
            cfg.tol_eff = js.value("tol_eff", cfg.tol_eff);
        }
        if (j.contains("output")) cfg.output_dir = j.at("output").value("dir", ".");
        cfg.parallelism = j.value("parallelism", 1);
        if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
        if (j.contains("friedman")) cfg.friedman_scope = j.at("friedman").value("on", "overall");
        if (cfg.friedman_scope != "overall" && cfg.friedman_scope != "stage1" &&
            cfg.friedman_scope != "stage2")
            throw ConfigError("friedman.on must be overall, stage1 or stage2");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    // Relative panel paths resolve against the config file's directory.
    std::filesystem::path panel(cfg.panel_path);
    if (panel.is_relative())
        cfg.panel_path = (std::filesystem::path(path).parent_path() / panel).string();
    std::ifstream panel_probe(cfg.panel_path);
    if (!panel_probe) throw ConfigError("panel file '" + cfg.panel_path + "' does not exist");
    return cfg;
}

namespace {

PreprocessResult load_and_preprocess(const RunConfig& cfg) {
    std::ifstream is(cfg.panel_path);
    if (!is) throw ConfigError("cannot open panel '" + cfg.panel_path + "'");
    DmuPanel raw = load_panel(is, cfg.schema);
    return preprocess(raw, cfg.impute, cfg.epsilon_shift);
}

bool needs_uncertainty(const std::vector<ModelFamily>& fams) {
    for (ModelFamily f : fams)
        if (f != ModelFamily::Crisp) return true;
    return false;
}

} // namespace

std::string check_config(const RunConfig& cfg) {
    PreprocessResult pre = load_and_preprocess(cfg);
    const DmuPanel& p = pre.panel;

    if (needs_uncertainty(cfg.families) && cfg.uncertainty.layer_fractions.empty())
        throw ConfigError("robust families selected but no deviation layers configured");

    std::ostringstream os;
    os << "panel: " << p.n() << " DMUs, " << p.m() << " inputs, " << p.d() << " intermediates, "
       << p.s1() << " desirable outputs, " << p.s2() << " undesirable outputs\n";
    os << "families:";
    for (ModelFamily f : cfg.families) os << ' ' << family_name(f);
    os << "\nlayers: L=" << cfg.uncertainty.layer_fractions.size();
    for (double f : cfg.uncertainty.layer_fractions) os << ' ' << f;
    os << "\n";
    if (!pre.shifted_columns.empty()) {
        os << "shifted columns:";
        for (const auto& c : pre.shifted_columns) os << ' ' << c;
        os << "\n";
    }
    for (const auto& w : pre.warnings) os << "warning: " << w << "\n";
    return os.str();
}

namespace {

StageCell cell_from_stage(const StageSolution& sol) {
    StageCell c;
    switch (sol.status) {
        case SolveStatus::Optimal: c.status = "optimal"; break;
        case SolveStatus::Infeasible: c.status = "infeasible"; break;
        case SolveStatus::Unbounded: c.status = "unbounded"; break;
        case SolveStatus::NumericalFailure: c.status = "numerical_failure"; break;
    }
    c.warnings = sol.warnings;
    if (sol.status == SolveStatus::Optimal) {
        c.w = sol.w;
        c.eff = sol.eff;
        c.efficient = sol.classification == Classification::Efficient;
        c.slacks = sol.slacks;
        c.lambda = sol.lambda;
    }
    return c;
}

StageCell error_cell(const std::string& message) {
    StageCell c;
    c.status = "error";
    c.warnings.push_back(message);
    return c;
}

struct Task {
    size_t family_index;
    size_t dmu;
};

} // namespace

EfficiencyReport run_batch(const RunConfig& cfg) {
    PreprocessResult pre = load_and_preprocess(cfg);
    const DmuPanel panel = pre.panel;
    const size_t n = panel.n();

    std::optional<DeviationLayers> layers;
    std::optional<EllipsoidalSpec> espec;
    std::optional<BudgetSpec> bspec;
    if (needs_uncertainty(cfg.families)) {
        if (cfg.uncertainty.layer_fractions.empty())
            throw ConfigError("robust families selected but no deviation layers configured");
        layers = make_layers(panel, PercentOfNominal{cfg.uncertainty.layer_fractions});
        EllipsoidalSpec e;
        e.omega_inputs.assign(panel.m(), cfg.uncertainty.omega_inputs);
        e.omega_intermediates.assign(panel.d(), cfg.uncertainty.omega_intermediates);
        e.omega_desirable.assign(panel.s1(), cfg.uncertainty.omega_desirable);
        e.omega_undesirable.assign(panel.s2(), cfg.uncertainty.omega_undesirable);
        espec = e;
        BudgetSpec b;
        b.gamma_inputs.assign(panel.m(), cfg.uncertainty.gamma_inputs);
        b.gamma_intermediates.assign(panel.d(), cfg.uncertainty.gamma_intermediates);
        b.gamma_desirable.assign(panel.s1(), cfg.uncertainty.gamma_desirable);
        b.gamma_undesirable.assign(panel.s2(), cfg.uncertainty.gamma_undesirable);
        bspec = b;
    }

    EfficiencyReport report;
    report.dmu_names = panel.names;
    report.preprocessing_warnings = pre.warnings;
    for (const auto& c : pre.shifted_columns)
        report.preprocessing_warnings.push_back("column '" + c + "' shifted to positive range");

    for (ModelFamily f : {ModelFamily::Crisp, ModelFamily::Ellipsoidal, ModelFamily::Polyhedral,
                          ModelFamily::Budget}) {
        if (std::find(cfg.families.begin(), cfg.families.end(), f) == cfg.families.end()) continue;
        FamilyResult fam;
        fam.family = f;
        fam.stage1.resize(n);
        fam.stage2.resize(n);
        fam.overall.assign(n, std::numeric_limits<double>::quiet_NaN());
        fam.overall_efficient.assign(n, false);
        report.families.push_back(std::move(fam));
    }

    auto solve_stage = [&](ModelFamily f, size_t k, StageRole stage) -> StageCell {
        try {
            SbmModel model;
            switch (f) {
                case ModelFamily::Crisp:
                    model = stage == StageRole::Stage1 ? build_stage1(panel, k, SbmForm::RobustReady)
                                                       : build_stage2(panel, k, SbmForm::RobustReady);
                    break;
                case ModelFamily::Ellipsoidal:
                    model = stage == StageRole::Stage1
                                ? build_robust_stage1_ellipsoidal(panel, k, *layers, *espec)
                                : build_robust_stage2_ellipsoidal(panel, k, *layers, *espec);
                    break;
                case ModelFamily::Polyhedral:
                    model = stage == StageRole::Stage1
                                ? build_robust_stage1_polyhedral(panel, k, *layers,
                                                                 cfg.uncertainty.polyhedral)
                                : build_robust_stage2_polyhedral(panel, k, *layers,
                                                                 cfg.uncertainty.polyhedral);
                    break;
                case ModelFamily::Budget:
                    model = stage == StageRole::Stage1
                                ? build_robust_stage1_budget(panel, k, *layers, *bspec)
                                : build_robust_stage2_budget(panel, k, *layers, *bspec);
                    break;
            }
            SolveOutcome outcome = solve(model.program, cfg.solver);
            return cell_from_stage(extract_solution(outcome, model, cfg.tol_eff));
        } catch (const std::exception& e) {
            return error_cell(e.what());
        }
    };

    std::vector<Task> tasks;
    for (size_t fi = 0; fi < report.families.size(); ++fi)
        for (size_t k = 0; k < n; ++k) tasks.push_back({fi, k});

    const int degree = std::max(1, std::min<int>(cfg.parallelism, static_cast<int>(tasks.size())));
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            FamilyResult& fam = report.families[task.family_index];
            fam.stage1[task.dmu] = solve_stage(fam.family, task.dmu, StageRole::Stage1);
            fam.stage2[task.dmu] = solve_stage(fam.family, task.dmu, StageRole::Stage2);
        }
    };
    if (degree == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < degree; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Aggregation in canonical DMU order.
    for (auto& fam : report.families) {
        size_t solved = 0;
        std::string first_error;
        for (size_t k = 0; k < n; ++k) {
            const StageCell& s1 = fam.stage1[k];
            const StageCell& s2 = fam.stage2[k];
            if (s1.ok() && s2.ok()) {
                fam.overall[k] = s1.eff * s2.eff;
                fam.overall_efficient[k] = s1.efficient && s2.efficient;
            }
            if (s1.ok() && s2.ok()) ++solved;
            if (first_error.empty()) {
                for (const StageCell* c : {&s1, &s2})
                    if (!c->ok() && !c->warnings.empty()) first_error = c->warnings.front();
            }
            auto consider = [&](std::optional<LowestEntry>& slot, const StageCell& c) {
                if (!c.ok()) return;
                if (!slot || c.eff < slot->eff) slot = LowestEntry{panel.names[k], c.eff};
            };
            consider(fam.lowest_stage1, s1);
            consider(fam.lowest_stage2, s2);
            if (s1.ok() && s2.ok()) {
                if (!fam.lowest_overall || fam.overall[k] < fam.lowest_overall->eff)
                    fam.lowest_overall = LowestEntry{panel.names[k], fam.overall[k]};
            }
        }
        if (solved == 0)
            throw FamilyAbort("family '" + family_name(fam.family) + "' failed for every DMU" +
                              (first_error.empty() ? "" : (": " + first_error)));
    }

    if (report.families.size() >= 2 && n >= 2) {
        std::vector<ModelFamily> fams;
        for (const auto& fam : report.families) fams.push_back(fam.family);
        try {
            report.friedman = friedman_over_report(report, fams, cfg.friedman_scope);
            report.friedman_scope = cfg.friedman_scope;
        } catch (const StatsError&) {
            // Not enough complete blocks; the report simply omits the test.
        }
    }
    return report;
}

} // namespace netsbm
