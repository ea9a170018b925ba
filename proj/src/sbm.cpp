#include "netsbm/sbm.hpp"

#include <cmath>

namespace netsbm {

namespace {

void require_ready(const DmuPanel& panel, size_t k) {
    if (k >= panel.n())
        throw SbmError("DMU index " + std::to_string(k) + " out of range (n=" +
                       std::to_string(panel.n()) + ")");
    if (!panel.strictly_positive())
        throw SbmError("panel has missing or non-positive cells; run preprocessing first");
}

struct Vars {
    int p;
    std::vector<int> lambda;
};

Vars add_core_vars(ConicProgram& prog, const DmuPanel& panel, const char* pname) {
    Vars v;
    v.p = prog.add_variable(pname);
    for (const auto& name : panel.names) v.lambda.push_back(prog.add_variable("lambda[" + name + "]"));
    return v;
}

std::vector<int> add_named(ConicProgram& prog, const std::string& prefix,
                           const std::vector<std::string>& cols) {
    std::vector<int> ids;
    ids.reserve(cols.size());
    for (const auto& c : cols) ids.push_back(prog.add_variable(prefix + "[" + c + "]"));
    return ids;
}

void add_vrs_and_plb(ConicProgram& prog, const Vars& v) {
    LinearExpr vrs;
    for (int l : v.lambda) vrs.add(l, 1.0);
    vrs.add(v.p, -1.0);
    prog.add_constraint(std::move(vrs), Relation::Equal, 0.0, "vrs");

    LinearExpr plb;
    plb.add(v.p, 1.0);
    prog.add_constraint(std::move(plb), Relation::GreaterEqual, kEpsilonP, "p_floor");
}

} // namespace

SbmModel build_blackbox_sbm(const DmuPanel& panel, size_t k) {
    require_ready(panel, k);
    if (panel.s2() != 0)
        throw SbmError("black-box SBM expects no undesirable outputs; use the undesirable builder");

    SbmModel model;
    model.stage = StageRole::BlackBox;
    model.dmu = static_cast<int>(k);
    ConicProgram& prog = model.program;

    Vars v = add_core_vars(prog, panel, "p");
    model.var_p = v.p;
    model.var_lambda = v.lambda;
    model.var_slack_in = add_named(prog, "slack_in", panel.inputs.columns);
    model.var_slack_good = add_named(prog, "slack_out", panel.desirable.columns);

    const size_t m = panel.m(), s = panel.s1();

    LinearExpr obj;
    obj.add(v.p, 1.0);
    for (size_t r = 0; r < s; ++r)
        obj.add(model.var_slack_good[r], 1.0 / (static_cast<double>(s) * panel.at(ColumnRole::Desirable, k, r)));
    prog.set_objective(Sense::Maximize, std::move(obj));

    LinearExpr norm;
    norm.add(v.p, 1.0);
    for (size_t i = 0; i < m; ++i)
        norm.add(model.var_slack_in[i], -1.0 / (static_cast<double>(m) * panel.at(ColumnRole::Input, k, i)));
    prog.add_constraint(std::move(norm), Relation::Equal, 1.0, "norm");

    for (size_t i = 0; i < m; ++i) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Input, k, i));
        for (size_t j = 0; j < panel.n(); ++j)
            row.add(v.lambda[j], -panel.at(ColumnRole::Input, j, i));
        row.add(model.var_slack_in[i], -1.0);
        prog.add_constraint(std::move(row), Relation::Equal, 0.0, "in:" + panel.inputs.columns[i]);
    }
    for (size_t r = 0; r < s; ++r) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Desirable, k, r));
        for (size_t j = 0; j < panel.n(); ++j)
            row.add(v.lambda[j], -panel.at(ColumnRole::Desirable, j, r));
        row.add(model.var_slack_good[r], 1.0);
        prog.add_constraint(std::move(row), Relation::Equal, 0.0, "out:" + panel.desirable.columns[r]);
    }
    add_vrs_and_plb(prog, v);
    return model;
}

SbmModel build_undesirable_sbm(const DmuPanel& panel, size_t k) {
    require_ready(panel, k);
    if (panel.s2() == 0)
        throw SbmError("undesirable SBM requires at least one undesirable output column");

    SbmModel model;
    model.stage = StageRole::BlackBox;
    model.dmu = static_cast<int>(k);
    ConicProgram& prog = model.program;

    Vars v = add_core_vars(prog, panel, "p");
    model.var_p = v.p;
    model.var_lambda = v.lambda;
    model.var_slack_in = add_named(prog, "slack_in", panel.inputs.columns);
    model.var_slack_good = add_named(prog, "slack_good", panel.desirable.columns);
    model.var_slack_bad = add_named(prog, "slack_bad", panel.undesirable.columns);

    const size_t m = panel.m(), s1 = panel.s1(), s2 = panel.s2();
    const double s_total = static_cast<double>(s1 + s2);

    LinearExpr obj;
    obj.add(v.p, 1.0);
    for (size_t r = 0; r < s1; ++r)
        obj.add(model.var_slack_good[r], 1.0 / (s_total * panel.at(ColumnRole::Desirable, k, r)));
    for (size_t r = 0; r < s2; ++r)
        obj.add(model.var_slack_bad[r], 1.0 / (s_total * panel.at(ColumnRole::Undesirable, k, r)));
    prog.set_objective(Sense::Maximize, std::move(obj));

    LinearExpr norm;
    norm.add(v.p, 1.0);
    for (size_t i = 0; i < m; ++i)
        norm.add(model.var_slack_in[i], -1.0 / (static_cast<double>(m) * panel.at(ColumnRole::Input, k, i)));
    prog.add_constraint(std::move(norm), Relation::Equal, 1.0, "norm");

    for (size_t i = 0; i < m; ++i) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Input, k, i));
        for (size_t j = 0; j < panel.n(); ++j)
            row.add(v.lambda[j], -panel.at(ColumnRole::Input, j, i));
        row.add(model.var_slack_in[i], -1.0);
        prog.add_constraint(std::move(row), Relation::Equal, 0.0, "in:" + panel.inputs.columns[i]);
    }
    for (size_t r = 0; r < s1; ++r) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Desirable, k, r));
        for (size_t j = 0; j < panel.n(); ++j)
            row.add(v.lambda[j], -panel.at(ColumnRole::Desirable, j, r));
        row.add(model.var_slack_good[r], 1.0);
        prog.add_constraint(std::move(row), Relation::Equal, 0.0, "good:" + panel.desirable.columns[r]);
    }
    // Undesirable outputs carry input-like slack direction.
    for (size_t r = 0; r < s2; ++r) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Undesirable, k, r));
        for (size_t j = 0; j < panel.n(); ++j)
            row.add(v.lambda[j], -panel.at(ColumnRole::Undesirable, j, r));
        row.add(model.var_slack_bad[r], -1.0);
        prog.add_constraint(std::move(row), Relation::Equal, 0.0, "bad:" + panel.undesirable.columns[r]);
    }
    add_vrs_and_plb(prog, v);
    return model;
}

SbmModel build_stage1(const DmuPanel& panel, size_t k, SbmForm form) {
    require_ready(panel, k);
    if (panel.d() == 0) throw SbmError("stage 1 requires at least one intermediate column");

    SbmModel model;
    model.stage = StageRole::Stage1;
    model.form = form;
    model.dmu = static_cast<int>(k);
    ConicProgram& prog = model.program;

    if (form == SbmForm::RobustReady) model.var_w = prog.add_variable("w");
    Vars v = add_core_vars(prog, panel, "p1");
    model.var_p = v.p;
    model.var_lambda = v.lambda;
    model.var_slack_in = add_named(prog, "slack_in", panel.inputs.columns);
    model.var_slack_mid = add_named(prog, "slack_mid", panel.intermediates.columns);

    const size_t m = panel.m(), nd = panel.d(), n = panel.n();

    if (form == SbmForm::RobustReady) {
        model.var_ratio_in = add_named(prog, "ratio_in", panel.inputs.columns);
        model.var_ratio_mid = add_named(prog, "ratio_mid", panel.intermediates.columns);

        LinearExpr obj;
        obj.add(model.var_w, 1.0);
        prog.set_objective(Sense::Maximize, std::move(obj));

        LinearExpr wrow;
        wrow.add(model.var_w, 1.0);
        wrow.add(v.p, -1.0);
        for (size_t d0 = 0; d0 < nd; ++d0)
            wrow.add(model.var_ratio_mid[d0], -1.0 / static_cast<double>(nd));
        prog.add_constraint(std::move(wrow), Relation::LessEqual, 0.0, "w_bound");

        LinearExpr norm;
        norm.add(v.p, 1.0);
        for (size_t i = 0; i < m; ++i) norm.add(model.var_ratio_in[i], -1.0 / static_cast<double>(m));
        prog.add_constraint(std::move(norm), Relation::LessEqual, 1.0, "norm");
    } else {
        LinearExpr obj;
        obj.add(v.p, 1.0);
        for (size_t d0 = 0; d0 < nd; ++d0)
            obj.add(model.var_slack_mid[d0],
                    1.0 / (static_cast<double>(nd) * panel.at(ColumnRole::Intermediate, k, d0)));
        prog.set_objective(Sense::Maximize, std::move(obj));

        LinearExpr norm;
        norm.add(v.p, 1.0);
        for (size_t i = 0; i < m; ++i)
            norm.add(model.var_slack_in[i],
                     -1.0 / (static_cast<double>(m) * panel.at(ColumnRole::Input, k, i)));
        prog.add_constraint(std::move(norm),
                            form == SbmForm::Equality ? Relation::Equal : Relation::LessEqual, 1.0,
                            "norm");
    }

    // Balance rows. In the relaxed forms each slack direction still binds at
    // the optimum because it is rewarded through the objective.
    for (size_t i = 0; i < m; ++i) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Input, k, i));
        for (size_t j = 0; j < n; ++j) row.add(v.lambda[j], -panel.at(ColumnRole::Input, j, i));
        row.add(model.var_slack_in[i], -1.0);
        prog.add_constraint(std::move(row),
                            form == SbmForm::Equality ? Relation::Equal : Relation::GreaterEqual, 0.0,
                            "in:" + panel.inputs.columns[i]);
    }
    for (size_t d0 = 0; d0 < nd; ++d0) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Intermediate, k, d0));
        for (size_t j = 0; j < n; ++j) row.add(v.lambda[j], -panel.at(ColumnRole::Intermediate, j, d0));
        row.add(model.var_slack_mid[d0], 1.0);
        prog.add_constraint(std::move(row),
                            form == SbmForm::Equality ? Relation::Equal : Relation::LessEqual, 0.0,
                            "mid:" + panel.intermediates.columns[d0]);
    }

    if (form == SbmForm::RobustReady) {
        for (size_t d0 = 0; d0 < nd; ++d0) {
            LinearExpr row;
            row.add(model.var_ratio_mid[d0], panel.at(ColumnRole::Intermediate, k, d0));
            row.add(model.var_slack_mid[d0], -1.0);
            prog.add_constraint(std::move(row), Relation::LessEqual, 0.0,
                                "ratio_mid:" + panel.intermediates.columns[d0]);
        }
        for (size_t i = 0; i < m; ++i) {
            LinearExpr row;
            row.add(model.var_ratio_in[i], panel.at(ColumnRole::Input, k, i));
            row.add(model.var_slack_in[i], -1.0);
            prog.add_constraint(std::move(row), Relation::LessEqual, 0.0,
                                "ratio_in:" + panel.inputs.columns[i]);
        }
    }
    add_vrs_and_plb(prog, v);
    return model;
}

SbmModel build_stage2(const DmuPanel& panel, size_t k, SbmForm form) {
    require_ready(panel, k);
    if (panel.d() == 0) throw SbmError("stage 2 requires at least one intermediate column");
    if (panel.s1() == 0) throw SbmError("stage 2 requires at least one desirable output column");

    SbmModel model;
    model.stage = StageRole::Stage2;
    model.form = form;
    model.dmu = static_cast<int>(k);
    ConicProgram& prog = model.program;

    if (form == SbmForm::RobustReady) model.var_w = prog.add_variable("w");
    Vars v = add_core_vars(prog, panel, "p2");
    model.var_p = v.p;
    model.var_lambda = v.lambda;
    model.var_slack_mid = add_named(prog, "slack_mid", panel.intermediates.columns);
    model.var_slack_good = add_named(prog, "slack_good", panel.desirable.columns);
    model.var_slack_bad = add_named(prog, "slack_bad", panel.undesirable.columns);

    const size_t nd = panel.d(), s1 = panel.s1(), s2 = panel.s2(), n = panel.n();
    const double s_total = static_cast<double>(s1 + s2);

    if (form == SbmForm::RobustReady) {
        model.var_ratio_mid = add_named(prog, "ratio_mid", panel.intermediates.columns);
        model.var_ratio_good = add_named(prog, "ratio_good", panel.desirable.columns);
        model.var_ratio_bad = add_named(prog, "ratio_bad", panel.undesirable.columns);

        LinearExpr obj;
        obj.add(model.var_w, 1.0);
        prog.set_objective(Sense::Maximize, std::move(obj));

        LinearExpr wrow;
        wrow.add(model.var_w, 1.0);
        wrow.add(v.p, -1.0);
        for (size_t r = 0; r < s1; ++r) wrow.add(model.var_ratio_good[r], -1.0 / s_total);
        for (size_t r = 0; r < s2; ++r) wrow.add(model.var_ratio_bad[r], 1.0 / s_total);
        prog.add_constraint(std::move(wrow), Relation::LessEqual, 0.0, "w_bound");

        LinearExpr norm;
        norm.add(v.p, 1.0);
        for (size_t d0 = 0; d0 < nd; ++d0)
            norm.add(model.var_ratio_mid[d0], -1.0 / static_cast<double>(nd));
        prog.add_constraint(std::move(norm), Relation::LessEqual, 1.0, "norm");
    } else {
        // The undesirable slack term enters the objective with a minus sign.
        LinearExpr obj;
        obj.add(v.p, 1.0);
        for (size_t r = 0; r < s1; ++r)
            obj.add(model.var_slack_good[r], 1.0 / (s_total * panel.at(ColumnRole::Desirable, k, r)));
        for (size_t r = 0; r < s2; ++r)
            obj.add(model.var_slack_bad[r], -1.0 / (s_total * panel.at(ColumnRole::Undesirable, k, r)));
        prog.set_objective(Sense::Maximize, std::move(obj));

        LinearExpr norm;
        norm.add(v.p, 1.0);
        for (size_t d0 = 0; d0 < nd; ++d0)
            norm.add(model.var_slack_mid[d0],
                     -1.0 / (static_cast<double>(nd) * panel.at(ColumnRole::Intermediate, k, d0)));
        prog.add_constraint(std::move(norm),
                            form == SbmForm::Equality ? Relation::Equal : Relation::LessEqual, 1.0,
                            "norm");
    }

    for (size_t d0 = 0; d0 < nd; ++d0) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Intermediate, k, d0));
        for (size_t j = 0; j < n; ++j) row.add(v.lambda[j], -panel.at(ColumnRole::Intermediate, j, d0));
        row.add(model.var_slack_mid[d0], -1.0);
        prog.add_constraint(std::move(row),
                            form == SbmForm::Equality ? Relation::Equal : Relation::GreaterEqual, 0.0,
                            "mid:" + panel.intermediates.columns[d0]);
    }
    for (size_t r = 0; r < s1; ++r) {
        LinearExpr row;
        row.add(v.p, panel.at(ColumnRole::Desirable, k, r));
        for (size_t j = 0; j < n; ++j) row.add(v.lambda[j], -panel.at(ColumnRole::Desirable, j, r));
        row.add(model.var_slack_good[r], 1.0);
        prog.add_constraint(std::move(row),
                            form == SbmForm::Equality ? Relation::Equal : Relation::LessEqual, 0.0,
                            "good:" + panel.desirable.columns[r]);
    }
    for (size_t r = 0; r < s2; ++r) {
        LinearExpr row;
        row.add(v.p, -panel.at(ColumnRole::Undesirable, k, r));
        for (size_t j = 0; j < n; ++j) row.add(v.lambda[j], panel.at(ColumnRole::Undesirable, j, r));
        row.add(model.var_slack_bad[r], 1.0);
        prog.add_constraint(std::move(row),
                            form == SbmForm::Equality ? Relation::Equal : Relation::LessEqual, 0.0,
                            "bad:" + panel.undesirable.columns[r]);
    }

    if (form == SbmForm::RobustReady) {
        for (size_t r = 0; r < s1; ++r) {
            LinearExpr row;
            row.add(model.var_ratio_good[r], panel.at(ColumnRole::Desirable, k, r));
            row.add(model.var_slack_good[r], -1.0);
            prog.add_constraint(std::move(row), Relation::LessEqual, 0.0,
                                "ratio_good:" + panel.desirable.columns[r]);
        }
        for (size_t r = 0; r < s2; ++r) {
            LinearExpr row;
            row.add(model.var_ratio_bad[r], panel.at(ColumnRole::Undesirable, k, r));
            row.add(model.var_slack_bad[r], -1.0);
            prog.add_constraint(std::move(row), Relation::LessEqual, 0.0,
                                "ratio_bad:" + panel.undesirable.columns[r]);
        }
        for (size_t d0 = 0; d0 < nd; ++d0) {
            LinearExpr row;
            row.add(model.var_ratio_mid[d0], panel.at(ColumnRole::Intermediate, k, d0));
            row.add(model.var_slack_mid[d0], -1.0);
            prog.add_constraint(std::move(row), Relation::LessEqual, 0.0,
                                "ratio_mid:" + panel.intermediates.columns[d0]);
        }
    }
    add_vrs_and_plb(prog, v);
    return model;
}

StageSolution extract_solution(const SolveOutcome& outcome, const SbmModel& model, double tol_eff) {
    StageSolution sol;
    sol.status = outcome.status;
    if (outcome.status != SolveStatus::Optimal) return sol;

    double w = outcome.objective;
    sol.w = w;
    if (w < 1.0 - tol_eff) {
        sol.warnings.push_back("objective " + std::to_string(w) +
                               " below 1 beyond tolerance; solution kept unclamped");
        sol.eff = 1.0 / w;
    } else if (w < 1.0) {
        sol.warnings.push_back("objective marginally below 1; efficiency clamped to 1");
        sol.eff = 1.0;
    } else {
        sol.eff = 1.0 / w;
    }
    sol.classification =
        std::abs(sol.eff - 1.0) <= tol_eff ? Classification::Efficient : Classification::Inefficient;

    double p = outcome.assignment[static_cast<size_t>(model.var_p)];
    if (p < 1e-6) sol.warnings.push_back("homogenizer p = " + std::to_string(p) + " suspiciously small");

    auto copy_group = [&](const std::vector<int>& ids) {
        for (int id : ids)
            sol.slacks[model.program.variable(id).name] = outcome.assignment[static_cast<size_t>(id)];
    };
    copy_group(model.var_slack_in);
    copy_group(model.var_slack_mid);
    copy_group(model.var_slack_good);
    copy_group(model.var_slack_bad);
    for (int id : model.var_lambda)
        sol.lambda[model.program.variable(id).name] = outcome.assignment[static_cast<size_t>(id)];
    return sol;
}

double overall_efficiency(const StageSolution& stage1, const StageSolution& stage2) {
    return stage1.eff * stage2.eff;
}

bool overall_efficient(const StageSolution& stage1, const StageSolution& stage2) {
    return stage1.classification == Classification::Efficient &&
           stage2.classification == Classification::Efficient;
}

} // namespace netsbm
