#include "netsbm/robust.hpp"

#include "netsbm/solver.hpp"

#include <cmath>

namespace netsbm {

double DeviationLayers::at(ColumnRole role, int layer, size_t row, size_t col) const {
    const LayerValues& lv = layers.at(static_cast<size_t>(layer));
    switch (role) {
        case ColumnRole::Input: return lv.inputs[row][col];
        case ColumnRole::Intermediate: return lv.intermediates[row][col];
        case ColumnRole::Desirable: return lv.desirable[row][col];
        case ColumnRole::Undesirable: return lv.undesirable[row][col];
    }
    throw RobustError("bad column role");
}

bool DeviationLayers::family_all_zero(ColumnRole role) const {
    for (const auto& lv : layers) {
        const auto& mat = role == ColumnRole::Input        ? lv.inputs
                          : role == ColumnRole::Intermediate ? lv.intermediates
                          : role == ColumnRole::Desirable    ? lv.desirable
                                                             : lv.undesirable;
        for (const auto& row : mat)
            for (double v : row)
                if (v != 0.0) return false;
    }
    return true;
}

namespace {

std::vector<std::vector<double>> scaled_block(const PanelBlock& blk, size_t n, double f) {
    std::vector<std::vector<double>> out(n, std::vector<double>(blk.width()));
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < blk.width(); ++c) out[r][c] = f * *blk.cells[r][c];
    return out;
}

void check_block_dims(const std::vector<std::vector<double>>& mat, size_t n, size_t w,
                      const char* what, int layer) {
    if (mat.size() != n)
        throw RobustError(std::string(what) + " layer " + std::to_string(layer) + " has " +
                          std::to_string(mat.size()) + " rows, panel has " + std::to_string(n));
    for (const auto& row : mat)
        if (row.size() != w)
            throw RobustError(std::string(what) + " layer " + std::to_string(layer) +
                              " row width mismatch");
    for (const auto& row : mat)
        for (double v : row)
            if (!std::isfinite(v))
                throw RobustError(std::string(what) + " layer " + std::to_string(layer) +
                                  " has a non-finite deviation");
}

} // namespace

DeviationLayers make_layers(const DmuPanel& panel, const PercentOfNominal& generator) {
    if (!panel.complete()) throw RobustError("deviation layers require a complete panel");
    DeviationLayers out;
    out.L = static_cast<int>(generator.fractions.size());
    const size_t n = panel.n();
    for (double f : generator.fractions) {
        if (!std::isfinite(f)) throw RobustError("non-finite layer fraction");
        LayerValues lv;
        lv.inputs = scaled_block(panel.inputs, n, f);
        lv.intermediates = scaled_block(panel.intermediates, n, f);
        lv.desirable = scaled_block(panel.desirable, n, f);
        lv.undesirable = scaled_block(panel.undesirable, n, f);
        out.layers.push_back(std::move(lv));
    }
    return out;
}

DeviationLayers make_layers(const DmuPanel& panel, const ExplicitTable& generator) {
    DeviationLayers out;
    out.L = static_cast<int>(generator.layers.size());
    const size_t n = panel.n();
    int l = 0;
    for (const auto& lv : generator.layers) {
        check_block_dims(lv.inputs, n, panel.m(), "inputs", l);
        check_block_dims(lv.intermediates, n, panel.d(), "intermediates", l);
        check_block_dims(lv.desirable, n, panel.s1(), "desirable", l);
        check_block_dims(lv.undesirable, n, panel.s2(), "undesirable", l);
        ++l;
    }
    out.layers = generator.layers;
    return out;
}

EllipsoidalSpec EllipsoidalSpec::uniform(const DmuPanel& panel, double omega) {
    EllipsoidalSpec s;
    s.omega_inputs.assign(panel.m(), omega);
    s.omega_intermediates.assign(panel.d(), omega);
    s.omega_desirable.assign(panel.s1(), omega);
    s.omega_undesirable.assign(panel.s2(), omega);
    return s;
}

BudgetSpec BudgetSpec::uniform(const DmuPanel& panel, double gamma) {
    BudgetSpec s;
    s.gamma_inputs.assign(panel.m(), gamma);
    s.gamma_intermediates.assign(panel.d(), gamma);
    s.gamma_desirable.assign(panel.s1(), gamma);
    s.gamma_undesirable.assign(panel.s2(), gamma);
    return s;
}

PolyhedralFamily box_family(int L, double lo, double hi) {
    PolyhedralFamily f;
    for (int l = 0; l < L; ++l) {
        std::vector<double> row(static_cast<size_t>(L), 0.0);
        row[static_cast<size_t>(l)] = 1.0;
        f.h.push_back(row); // zeta_l >= -lo  <=>  zeta_l + lo >= 0
        f.q.push_back(lo);
    }
    for (int l = 0; l < L; ++l) {
        std::vector<double> row(static_cast<size_t>(L), 0.0);
        row[static_cast<size_t>(l)] = -1.0;
        f.h.push_back(row); // -zeta_l + hi >= 0
        f.q.push_back(hi);
    }
    return f;
}

PolyhedralFamily singleton_family(int L) { return box_family(L, 0.0, 0.0); }

void validate_polyhedral_family(const PolyhedralFamily& family, int L, const std::string& name) {
    const size_t K = family.h.size();
    if (K == 0) throw RobustError("polyhedral set for " + name + " has no rows");
    if (family.q.size() != K)
        throw RobustError("polyhedral set for " + name + ": H has " + std::to_string(K) +
                          " rows but q has " + std::to_string(family.q.size()));
    bool any_nonzero = false;
    for (const auto& row : family.h) {
        if (row.size() != static_cast<size_t>(L))
            throw RobustError("polyhedral set for " + name + ": H columns (" +
                              std::to_string(row.size()) + ") do not match L=" + std::to_string(L));
        for (double v : row) {
            if (!std::isfinite(v)) throw RobustError("polyhedral set for " + name + ": non-finite H entry");
            if (v != 0.0) any_nonzero = true;
        }
    }
    for (double v : family.q)
        if (!std::isfinite(v)) throw RobustError("polyhedral set for " + name + ": non-finite q entry");
    if (!any_nonzero)
        throw RobustError("polyhedral set for " + name +
                          " is vacuous (H = 0); refusing silent loss of protection");

    // Nonempty and bounded in every coordinate, checked with tiny LPs.
    for (int l = 0; l < L; ++l) {
        for (double sign : {1.0, -1.0}) {
            ConicProgram probe;
            std::vector<int> zeta;
            for (int j = 0; j < L; ++j)
                zeta.push_back(probe.add_variable("zeta" + std::to_string(j), /*nonneg=*/false));
            for (size_t r = 0; r < K; ++r) {
                LinearExpr row;
                for (int j = 0; j < L; ++j) row.add(zeta[static_cast<size_t>(j)], family.h[r][static_cast<size_t>(j)]);
                probe.add_constraint(std::move(row), Relation::GreaterEqual, -family.q[r]);
            }
            LinearExpr obj;
            obj.add(zeta[static_cast<size_t>(l)], sign);
            probe.set_objective(Sense::Maximize, std::move(obj));
            SolveOutcome o = solve(probe);
            if (o.status == SolveStatus::Infeasible)
                throw RobustError("polyhedral set for " + name + " is empty");
            if (o.status == SolveStatus::Unbounded)
                throw RobustError("polyhedral set for " + name +
                                  " is unbounded in zeta" + std::to_string(l) +
                                  "; the protection function is undefined");
            if (o.status != SolveStatus::Optimal)
                throw RobustError("could not certify the polyhedral set for " + name);
        }
    }
}

namespace {

void require_layers(const DeviationLayers& layers) {
    if (layers.L < 1)
        throw RobustError("robust builders need at least one deviation layer (L >= 1)");
}

void check_radii(const std::vector<double>& v, size_t want, const char* what) {
    if (v.size() != want)
        throw RobustError(std::string(what) + " has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(want));
    for (double x : v)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw RobustError(std::string(what) + " entries must be finite and >= 0");
}

void check_budgets(const std::vector<double>& v, size_t want, int L, const char* what) {
    check_radii(v, want, what);
    for (double x : v)
        if (x > static_cast<double>(L) + 1e-12)
            throw RobustError(std::string(what) + " exceeds the layer count L=" + std::to_string(L));
}

// Shared RobustReady-style skeleton: variables, objective w, w_bound and
// norm rows. Balance and ratio rows are the uncertain part; each robust
// builder appends its protected version, then closes with vrs and p_floor.
SbmModel robust_skeleton(const DmuPanel& panel, size_t k, StageRole stage) {
    if (k >= panel.n())
        throw SbmError("DMU index " + std::to_string(k) + " out of range (n=" +
                       std::to_string(panel.n()) + ")");
    if (!panel.strictly_positive())
        throw SbmError("panel has missing or non-positive cells; run preprocessing first");
    if (panel.d() == 0) throw SbmError("two-stage models require an intermediate column");
    if (stage == StageRole::Stage2 && panel.s1() == 0)
        throw SbmError("stage 2 requires at least one desirable output column");

    SbmModel model;
    model.stage = stage;
    model.form = SbmForm::RobustReady;
    model.dmu = static_cast<int>(k);
    ConicProgram& prog = model.program;

    model.var_w = prog.add_variable("w");
    model.var_p = prog.add_variable(stage == StageRole::Stage1 ? "p1" : "p2");
    for (const auto& name : panel.names)
        model.var_lambda.push_back(prog.add_variable("lambda[" + name + "]"));

    if (stage == StageRole::Stage1) {
        for (const auto& c : panel.inputs.columns)
            model.var_slack_in.push_back(prog.add_variable("slack_in[" + c + "]"));
        for (const auto& c : panel.intermediates.columns)
            model.var_slack_mid.push_back(prog.add_variable("slack_mid[" + c + "]"));
        for (const auto& c : panel.inputs.columns)
            model.var_ratio_in.push_back(prog.add_variable("ratio_in[" + c + "]"));
        for (const auto& c : panel.intermediates.columns)
            model.var_ratio_mid.push_back(prog.add_variable("ratio_mid[" + c + "]"));

        LinearExpr obj;
        obj.add(model.var_w, 1.0);
        prog.set_objective(Sense::Maximize, std::move(obj));

        LinearExpr wrow;
        wrow.add(model.var_w, 1.0);
        wrow.add(model.var_p, -1.0);
        for (int b : model.var_ratio_mid) wrow.add(b, -1.0 / static_cast<double>(panel.d()));
        prog.add_constraint(std::move(wrow), Relation::LessEqual, 0.0, "w_bound");

        LinearExpr norm;
        norm.add(model.var_p, 1.0);
        for (int a : model.var_ratio_in) norm.add(a, -1.0 / static_cast<double>(panel.m()));
        prog.add_constraint(std::move(norm), Relation::LessEqual, 1.0, "norm");
    } else {
        for (const auto& c : panel.intermediates.columns)
            model.var_slack_mid.push_back(prog.add_variable("slack_mid[" + c + "]"));
        for (const auto& c : panel.desirable.columns)
            model.var_slack_good.push_back(prog.add_variable("slack_good[" + c + "]"));
        for (const auto& c : panel.undesirable.columns)
            model.var_slack_bad.push_back(prog.add_variable("slack_bad[" + c + "]"));
        for (const auto& c : panel.intermediates.columns)
            model.var_ratio_mid.push_back(prog.add_variable("ratio_mid[" + c + "]"));
        for (const auto& c : panel.desirable.columns)
            model.var_ratio_good.push_back(prog.add_variable("ratio_good[" + c + "]"));
        for (const auto& c : panel.undesirable.columns)
            model.var_ratio_bad.push_back(prog.add_variable("ratio_bad[" + c + "]"));

        const double s_total = static_cast<double>(panel.s1() + panel.s2());

        LinearExpr obj;
        obj.add(model.var_w, 1.0);
        prog.set_objective(Sense::Maximize, std::move(obj));

        LinearExpr wrow;
        wrow.add(model.var_w, 1.0);
        wrow.add(model.var_p, -1.0);
        for (int c : model.var_ratio_good) wrow.add(c, -1.0 / s_total);
        for (int c : model.var_ratio_bad) wrow.add(c, 1.0 / s_total);
        prog.add_constraint(std::move(wrow), Relation::LessEqual, 0.0, "w_bound");

        LinearExpr norm;
        norm.add(model.var_p, 1.0);
        for (int b : model.var_ratio_mid) norm.add(b, -1.0 / static_cast<double>(panel.d()));
        prog.add_constraint(std::move(norm), Relation::LessEqual, 1.0, "norm");
    }
    return model;
}

void close_skeleton(SbmModel& model) {
    LinearExpr vrs;
    for (int l : model.var_lambda) vrs.add(l, 1.0);
    vrs.add(model.var_p, -1.0);
    model.program.add_constraint(std::move(vrs), Relation::Equal, 0.0, "vrs");
    LinearExpr plb;
    plb.add(model.var_p, 1.0);
    model.program.add_constraint(std::move(plb), Relation::GreaterEqual, kEpsilonP, "p_floor");
}

bool all_zero(const std::vector<LinearExpr>& devs) {
    for (const auto& e : devs) {
        if (e.constant != 0.0) return false;
        for (const auto& t : e.terms)
            if (t.coeff != 0.0) return false;
    }
    return true;
}

// base + Omega * ||devs||_2 <= 0, emitted as a second-order cone row; plain
// linear row when the protection vanishes.
void add_ellipsoidal_row(ConicProgram& prog, LinearExpr base, const std::vector<LinearExpr>& devs,
                         double omega, const std::string& label) {
    if (omega == 0.0 || all_zero(devs)) {
        prog.add_constraint(std::move(base), Relation::LessEqual, 0.0, label);
        return;
    }
    LinearExpr t;
    t.constant = -base.constant;
    for (const auto& tm : base.terms) t.add(tm.var, -tm.coeff);
    std::vector<LinearExpr> u;
    u.reserve(devs.size());
    for (const auto& d : devs) {
        LinearExpr m;
        m.constant = omega * d.constant;
        for (const auto& tm : d.terms) m.add(tm.var, omega * tm.coeff);
        u.push_back(std::move(m));
    }
    prog.add_soc(std::move(u), std::move(t), label);
}

// base + sum_kappa q_k nu_k <= 0 with support rows
// sum_kappa H(kappa,l) nu_kappa + dev_l = 0, nu >= 0. A missing family is
// only allowed when the deviations vanish structurally.
void add_polyhedral_row(ConicProgram& prog, LinearExpr base, const std::vector<LinearExpr>& devs,
                        const PolyhedralFamily* family, const std::string& label) {
    if (family == nullptr) {
        if (!all_zero(devs))
            throw RobustError("no polyhedral set supplied for uncertain row '" + label + "'");
        prog.add_constraint(std::move(base), Relation::LessEqual, 0.0, label);
        return;
    }
    const size_t K = family->h.size();
    std::vector<int> nu;
    nu.reserve(K);
    for (size_t kk = 0; kk < K; ++kk)
        nu.push_back(prog.add_variable("nu[" + label + "][" + std::to_string(kk) + "]"));

    LinearExpr protect = std::move(base);
    for (size_t kk = 0; kk < K; ++kk) protect.add(nu[kk], family->q[kk]);
    prog.add_constraint(std::move(protect), Relation::LessEqual, 0.0, label);

    for (size_t l = 0; l < devs.size(); ++l) {
        LinearExpr support = devs[l];
        for (size_t kk = 0; kk < K; ++kk) support.add(nu[kk], family->h[kk][l]);
        prog.add_constraint(std::move(support), Relation::Equal, 0.0,
                            label + ":dual" + std::to_string(l));
    }
}

// base + Gamma kappa + sum_l mu_l <= 0 with support rows
// kappa + mu_l >= dev_l, kappa, mu >= 0.
void add_budget_row(ConicProgram& prog, LinearExpr base, const std::vector<LinearExpr>& devs,
                    double gamma, const std::string& label) {
    if (all_zero(devs)) {
        prog.add_constraint(std::move(base), Relation::LessEqual, 0.0, label);
        return;
    }
    int kappa = prog.add_variable("kappa[" + label + "]");
    std::vector<int> mu;
    mu.reserve(devs.size());
    for (size_t l = 0; l < devs.size(); ++l)
        mu.push_back(prog.add_variable("mu[" + label + "][" + std::to_string(l) + "]"));

    LinearExpr protect = std::move(base);
    protect.add(kappa, gamma);
    for (int m : mu) protect.add(m, 1.0);
    prog.add_constraint(std::move(protect), Relation::LessEqual, 0.0, label);

    for (size_t l = 0; l < devs.size(); ++l) {
        LinearExpr support = devs[l];
        support.add(kappa, -1.0);
        support.add(mu[l], -1.0);
        prog.add_constraint(std::move(support), Relation::LessEqual, 0.0,
                            label + ":dual" + std::to_string(l));
    }
}

// --- deviation expressions per uncertain row -------------------------------

std::vector<LinearExpr> devs_balance_in(const SbmModel& model, const DmuPanel& panel, size_t k,
                                        const DeviationLayers& layers, size_t i) {
    std::vector<LinearExpr> devs;
    for (int l = 0; l < layers.L; ++l) {
        LinearExpr e;
        for (size_t j = 0; j < panel.n(); ++j)
            e.add(model.var_lambda[j], layers.at(ColumnRole::Input, l, j, i));
        e.add(model.var_p, -layers.at(ColumnRole::Input, l, k, i));
        devs.push_back(std::move(e));
    }
    return devs;
}

std::vector<LinearExpr> devs_balance_mid_stage1(const SbmModel& model, const DmuPanel& panel,
                                                size_t k, const DeviationLayers& layers, size_t d) {
    std::vector<LinearExpr> devs;
    for (int l = 0; l < layers.L; ++l) {
        LinearExpr e;
        e.add(model.var_p, layers.at(ColumnRole::Intermediate, l, k, d));
        for (size_t j = 0; j < panel.n(); ++j)
            e.add(model.var_lambda[j], -layers.at(ColumnRole::Intermediate, l, j, d));
        devs.push_back(std::move(e));
    }
    return devs;
}

std::vector<LinearExpr> devs_balance_mid_stage2(const SbmModel& model, const DmuPanel& panel,
                                                size_t k, const DeviationLayers& layers, size_t d) {
    std::vector<LinearExpr> devs;
    for (int l = 0; l < layers.L; ++l) {
        LinearExpr e;
        for (size_t j = 0; j < panel.n(); ++j)
            e.add(model.var_lambda[j], layers.at(ColumnRole::Intermediate, l, j, d));
        e.add(model.var_p, -layers.at(ColumnRole::Intermediate, l, k, d));
        devs.push_back(std::move(e));
    }
    return devs;
}

std::vector<LinearExpr> devs_balance_good(const SbmModel& model, const DmuPanel& panel, size_t k,
                                          const DeviationLayers& layers, size_t r) {
    std::vector<LinearExpr> devs;
    for (int l = 0; l < layers.L; ++l) {
        LinearExpr e;
        e.add(model.var_p, layers.at(ColumnRole::Desirable, l, k, r));
        for (size_t j = 0; j < panel.n(); ++j)
            e.add(model.var_lambda[j], -layers.at(ColumnRole::Desirable, l, j, r));
        devs.push_back(std::move(e));
    }
    return devs;
}

std::vector<LinearExpr> devs_balance_bad(const SbmModel& model, const DmuPanel& panel, size_t k,
                                         const DeviationLayers& layers, size_t r) {
    std::vector<LinearExpr> devs;
    for (int l = 0; l < layers.L; ++l) {
        LinearExpr e;
        for (size_t j = 0; j < panel.n(); ++j)
            e.add(model.var_lambda[j], layers.at(ColumnRole::Undesirable, l, j, r));
        e.add(model.var_p, -layers.at(ColumnRole::Undesirable, l, k, r));
        devs.push_back(std::move(e));
    }
    return devs;
}

std::vector<LinearExpr> devs_ratio(const DeviationLayers& layers, ColumnRole role, size_t k,
                                   size_t col, int ratio_var) {
    std::vector<LinearExpr> devs;
    for (int l = 0; l < layers.L; ++l) {
        LinearExpr e;
        e.add(ratio_var, layers.at(role, l, k, col));
        devs.push_back(std::move(e));
    }
    return devs;
}

// Nominal (base) expressions, all written as <= 0 rows.

LinearExpr base_balance_in(const SbmModel& model, const DmuPanel& panel, size_t k, size_t i) {
    LinearExpr e;
    e.add(model.var_p, -panel.at(ColumnRole::Input, k, i));
    for (size_t j = 0; j < panel.n(); ++j)
        e.add(model.var_lambda[j], panel.at(ColumnRole::Input, j, i));
    e.add(model.var_slack_in[i], 1.0);
    return e;
}

LinearExpr base_balance_mid_stage1(const SbmModel& model, const DmuPanel& panel, size_t k, size_t d) {
    LinearExpr e;
    e.add(model.var_p, panel.at(ColumnRole::Intermediate, k, d));
    for (size_t j = 0; j < panel.n(); ++j)
        e.add(model.var_lambda[j], -panel.at(ColumnRole::Intermediate, j, d));
    e.add(model.var_slack_mid[d], 1.0);
    return e;
}

LinearExpr base_balance_mid_stage2(const SbmModel& model, const DmuPanel& panel, size_t k, size_t d) {
    LinearExpr e;
    e.add(model.var_p, -panel.at(ColumnRole::Intermediate, k, d));
    for (size_t j = 0; j < panel.n(); ++j)
        e.add(model.var_lambda[j], panel.at(ColumnRole::Intermediate, j, d));
    e.add(model.var_slack_mid[d], 1.0);
    return e;
}

LinearExpr base_balance_good(const SbmModel& model, const DmuPanel& panel, size_t k, size_t r) {
    LinearExpr e;
    e.add(model.var_p, panel.at(ColumnRole::Desirable, k, r));
    for (size_t j = 0; j < panel.n(); ++j)
        e.add(model.var_lambda[j], -panel.at(ColumnRole::Desirable, j, r));
    e.add(model.var_slack_good[r], 1.0);
    return e;
}

LinearExpr base_balance_bad(const SbmModel& model, const DmuPanel& panel, size_t k, size_t r) {
    LinearExpr e;
    e.add(model.var_p, -panel.at(ColumnRole::Undesirable, k, r));
    for (size_t j = 0; j < panel.n(); ++j)
        e.add(model.var_lambda[j], panel.at(ColumnRole::Undesirable, j, r));
    e.add(model.var_slack_bad[r], 1.0);
    return e;
}

LinearExpr base_ratio(const DmuPanel& panel, ColumnRole role, size_t k, size_t col, int ratio_var,
                      int slack_var) {
    LinearExpr e;
    e.add(ratio_var, panel.at(role, k, col));
    e.add(slack_var, -1.0);
    return e;
}

} // namespace

SbmModel build_robust_stage1_ellipsoidal(const DmuPanel& panel, size_t k,
                                         const DeviationLayers& layers,
                                         const EllipsoidalSpec& spec) {
    require_layers(layers);
    check_radii(spec.omega_inputs, panel.m(), "omega_inputs");
    check_radii(spec.omega_intermediates, panel.d(), "omega_intermediates");

    SbmModel model = robust_skeleton(panel, k, StageRole::Stage1);
    ConicProgram& prog = model.program;

    for (size_t i = 0; i < panel.m(); ++i)
        add_ellipsoidal_row(prog, base_balance_in(model, panel, k, i),
                            devs_balance_in(model, panel, k, layers, i), spec.omega_inputs[i],
                            "in:" + panel.inputs.columns[i]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_ellipsoidal_row(prog, base_balance_mid_stage1(model, panel, k, d),
                            devs_balance_mid_stage1(model, panel, k, layers, d),
                            spec.omega_intermediates[d], "mid:" + panel.intermediates.columns[d]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_ellipsoidal_row(prog,
                            base_ratio(panel, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d],
                                       model.var_slack_mid[d]),
                            devs_ratio(layers, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d]),
                            spec.omega_intermediates[d],
                            "ratio_mid:" + panel.intermediates.columns[d]);
    for (size_t i = 0; i < panel.m(); ++i)
        add_ellipsoidal_row(prog,
                            base_ratio(panel, ColumnRole::Input, k, i, model.var_ratio_in[i],
                                       model.var_slack_in[i]),
                            devs_ratio(layers, ColumnRole::Input, k, i, model.var_ratio_in[i]),
                            spec.omega_inputs[i], "ratio_in:" + panel.inputs.columns[i]);
    close_skeleton(model);
    return model;
}

SbmModel build_robust_stage2_ellipsoidal(const DmuPanel& panel, size_t k,
                                         const DeviationLayers& layers,
                                         const EllipsoidalSpec& spec) {
    require_layers(layers);
    check_radii(spec.omega_intermediates, panel.d(), "omega_intermediates");
    check_radii(spec.omega_desirable, panel.s1(), "omega_desirable");
    check_radii(spec.omega_undesirable, panel.s2(), "omega_undesirable");

    SbmModel model = robust_skeleton(panel, k, StageRole::Stage2);
    ConicProgram& prog = model.program;

    for (size_t d = 0; d < panel.d(); ++d)
        add_ellipsoidal_row(prog, base_balance_mid_stage2(model, panel, k, d),
                            devs_balance_mid_stage2(model, panel, k, layers, d),
                            spec.omega_intermediates[d], "mid:" + panel.intermediates.columns[d]);
    for (size_t r = 0; r < panel.s1(); ++r)
        add_ellipsoidal_row(prog, base_balance_good(model, panel, k, r),
                            devs_balance_good(model, panel, k, layers, r), spec.omega_desirable[r],
                            "good:" + panel.desirable.columns[r]);
    for (size_t r = 0; r < panel.s2(); ++r)
        add_ellipsoidal_row(prog, base_balance_bad(model, panel, k, r),
                            devs_balance_bad(model, panel, k, layers, r), spec.omega_undesirable[r],
                            "bad:" + panel.undesirable.columns[r]);
    for (size_t r = 0; r < panel.s1(); ++r)
        add_ellipsoidal_row(prog,
                            base_ratio(panel, ColumnRole::Desirable, k, r, model.var_ratio_good[r],
                                       model.var_slack_good[r]),
                            devs_ratio(layers, ColumnRole::Desirable, k, r, model.var_ratio_good[r]),
                            spec.omega_desirable[r], "ratio_good:" + panel.desirable.columns[r]);
    for (size_t r = 0; r < panel.s2(); ++r)
        add_ellipsoidal_row(prog,
                            base_ratio(panel, ColumnRole::Undesirable, k, r, model.var_ratio_bad[r],
                                       model.var_slack_bad[r]),
                            devs_ratio(layers, ColumnRole::Undesirable, k, r, model.var_ratio_bad[r]),
                            spec.omega_undesirable[r], "ratio_bad:" + panel.undesirable.columns[r]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_ellipsoidal_row(prog,
                            base_ratio(panel, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d],
                                       model.var_slack_mid[d]),
                            devs_ratio(layers, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d]),
                            spec.omega_intermediates[d],
                            "ratio_mid:" + panel.intermediates.columns[d]);
    close_skeleton(model);
    return model;
}

namespace {

const PolyhedralFamily* family_for(const std::optional<PolyhedralFamily>& fam,
                                   const DeviationLayers& layers, ColumnRole role,
                                   const char* name) {
    if (fam.has_value()) {
        validate_polyhedral_family(*fam, layers.L, name);
        return &*fam;
    }
    if (!layers.family_all_zero(role))
        throw RobustError(std::string("polyhedral spec missing for ") + name +
                          " although its deviations are nonzero");
    return nullptr;
}

} // namespace

SbmModel build_robust_stage1_polyhedral(const DmuPanel& panel, size_t k,
                                        const DeviationLayers& layers, const PolyhedralSpec& spec) {
    require_layers(layers);
    const PolyhedralFamily* fx = family_for(spec.inputs, layers, ColumnRole::Input, "inputs");
    const PolyhedralFamily* fz =
        family_for(spec.intermediates, layers, ColumnRole::Intermediate, "intermediates");

    SbmModel model = robust_skeleton(panel, k, StageRole::Stage1);
    ConicProgram& prog = model.program;

    for (size_t i = 0; i < panel.m(); ++i)
        add_polyhedral_row(prog, base_balance_in(model, panel, k, i),
                           devs_balance_in(model, panel, k, layers, i), fx,
                           "in:" + panel.inputs.columns[i]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_polyhedral_row(prog, base_balance_mid_stage1(model, panel, k, d),
                           devs_balance_mid_stage1(model, panel, k, layers, d), fz,
                           "mid:" + panel.intermediates.columns[d]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_polyhedral_row(prog,
                           base_ratio(panel, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d],
                                      model.var_slack_mid[d]),
                           devs_ratio(layers, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d]),
                           fz, "ratio_mid:" + panel.intermediates.columns[d]);
    for (size_t i = 0; i < panel.m(); ++i)
        add_polyhedral_row(prog,
                           base_ratio(panel, ColumnRole::Input, k, i, model.var_ratio_in[i],
                                      model.var_slack_in[i]),
                           devs_ratio(layers, ColumnRole::Input, k, i, model.var_ratio_in[i]), fx,
                           "ratio_in:" + panel.inputs.columns[i]);
    close_skeleton(model);
    return model;
}

SbmModel build_robust_stage2_polyhedral(const DmuPanel& panel, size_t k,
                                        const DeviationLayers& layers, const PolyhedralSpec& spec) {
    require_layers(layers);
    const PolyhedralFamily* fz =
        family_for(spec.intermediates, layers, ColumnRole::Intermediate, "intermediates");
    const PolyhedralFamily* f1 = family_for(spec.desirable, layers, ColumnRole::Desirable, "desirable");
    const PolyhedralFamily* f2 =
        panel.s2() > 0 ? family_for(spec.undesirable, layers, ColumnRole::Undesirable, "undesirable")
                       : nullptr;

    SbmModel model = robust_skeleton(panel, k, StageRole::Stage2);
    ConicProgram& prog = model.program;

    for (size_t d = 0; d < panel.d(); ++d)
        add_polyhedral_row(prog, base_balance_mid_stage2(model, panel, k, d),
                           devs_balance_mid_stage2(model, panel, k, layers, d), fz,
                           "mid:" + panel.intermediates.columns[d]);
    for (size_t r = 0; r < panel.s1(); ++r)
        add_polyhedral_row(prog, base_balance_good(model, panel, k, r),
                           devs_balance_good(model, panel, k, layers, r), f1,
                           "good:" + panel.desirable.columns[r]);
    for (size_t r = 0; r < panel.s2(); ++r)
        add_polyhedral_row(prog, base_balance_bad(model, panel, k, r),
                           devs_balance_bad(model, panel, k, layers, r), f2,
                           "bad:" + panel.undesirable.columns[r]);
    for (size_t r = 0; r < panel.s1(); ++r)
        add_polyhedral_row(prog,
                           base_ratio(panel, ColumnRole::Desirable, k, r, model.var_ratio_good[r],
                                      model.var_slack_good[r]),
                           devs_ratio(layers, ColumnRole::Desirable, k, r, model.var_ratio_good[r]),
                           f1, "ratio_good:" + panel.desirable.columns[r]);
    for (size_t r = 0; r < panel.s2(); ++r)
        add_polyhedral_row(prog,
                           base_ratio(panel, ColumnRole::Undesirable, k, r, model.var_ratio_bad[r],
                                      model.var_slack_bad[r]),
                           devs_ratio(layers, ColumnRole::Undesirable, k, r, model.var_ratio_bad[r]),
                           f2, "ratio_bad:" + panel.undesirable.columns[r]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_polyhedral_row(prog,
                           base_ratio(panel, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d],
                                      model.var_slack_mid[d]),
                           devs_ratio(layers, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d]),
                           fz, "ratio_mid:" + panel.intermediates.columns[d]);
    close_skeleton(model);
    return model;
}

SbmModel build_robust_stage1_budget(const DmuPanel& panel, size_t k, const DeviationLayers& layers,
                                    const BudgetSpec& spec) {
    require_layers(layers);
    check_budgets(spec.gamma_inputs, panel.m(), layers.L, "gamma_inputs");
    check_budgets(spec.gamma_intermediates, panel.d(), layers.L, "gamma_intermediates");

    SbmModel model = robust_skeleton(panel, k, StageRole::Stage1);
    ConicProgram& prog = model.program;

    for (size_t i = 0; i < panel.m(); ++i)
        add_budget_row(prog, base_balance_in(model, panel, k, i),
                       devs_balance_in(model, panel, k, layers, i), spec.gamma_inputs[i],
                       "in:" + panel.inputs.columns[i]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_budget_row(prog, base_balance_mid_stage1(model, panel, k, d),
                       devs_balance_mid_stage1(model, panel, k, layers, d),
                       spec.gamma_intermediates[d], "mid:" + panel.intermediates.columns[d]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_budget_row(prog,
                       base_ratio(panel, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d],
                                  model.var_slack_mid[d]),
                       devs_ratio(layers, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d]),
                       spec.gamma_intermediates[d], "ratio_mid:" + panel.intermediates.columns[d]);
    for (size_t i = 0; i < panel.m(); ++i)
        add_budget_row(prog,
                       base_ratio(panel, ColumnRole::Input, k, i, model.var_ratio_in[i],
                                  model.var_slack_in[i]),
                       devs_ratio(layers, ColumnRole::Input, k, i, model.var_ratio_in[i]),
                       spec.gamma_inputs[i], "ratio_in:" + panel.inputs.columns[i]);
    close_skeleton(model);
    return model;
}

SbmModel build_robust_stage2_budget(const DmuPanel& panel, size_t k, const DeviationLayers& layers,
                                    const BudgetSpec& spec) {
    require_layers(layers);
    check_budgets(spec.gamma_intermediates, panel.d(), layers.L, "gamma_intermediates");
    check_budgets(spec.gamma_desirable, panel.s1(), layers.L, "gamma_desirable");
    check_budgets(spec.gamma_undesirable, panel.s2(), layers.L, "gamma_undesirable");

    SbmModel model = robust_skeleton(panel, k, StageRole::Stage2);
    ConicProgram& prog = model.program;

    for (size_t d = 0; d < panel.d(); ++d)
        add_budget_row(prog, base_balance_mid_stage2(model, panel, k, d),
                       devs_balance_mid_stage2(model, panel, k, layers, d),
                       spec.gamma_intermediates[d], "mid:" + panel.intermediates.columns[d]);
    for (size_t r = 0; r < panel.s1(); ++r)
        add_budget_row(prog, base_balance_good(model, panel, k, r),
                       devs_balance_good(model, panel, k, layers, r), spec.gamma_desirable[r],
                       "good:" + panel.desirable.columns[r]);
    for (size_t r = 0; r < panel.s2(); ++r)
        add_budget_row(prog, base_balance_bad(model, panel, k, r),
                       devs_balance_bad(model, panel, k, layers, r), spec.gamma_undesirable[r],
                       "bad:" + panel.undesirable.columns[r]);
    for (size_t r = 0; r < panel.s1(); ++r)
        add_budget_row(prog,
                       base_ratio(panel, ColumnRole::Desirable, k, r, model.var_ratio_good[r],
                                  model.var_slack_good[r]),
                       devs_ratio(layers, ColumnRole::Desirable, k, r, model.var_ratio_good[r]),
                       spec.gamma_desirable[r], "ratio_good:" + panel.desirable.columns[r]);
    for (size_t r = 0; r < panel.s2(); ++r)
        add_budget_row(prog,
                       base_ratio(panel, ColumnRole::Undesirable, k, r, model.var_ratio_bad[r],
                                  model.var_slack_bad[r]),
                       devs_ratio(layers, ColumnRole::Undesirable, k, r, model.var_ratio_bad[r]),
                       spec.gamma_undesirable[r], "ratio_bad:" + panel.undesirable.columns[r]);
    for (size_t d = 0; d < panel.d(); ++d)
        add_budget_row(prog,
                       base_ratio(panel, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d],
                                  model.var_slack_mid[d]),
                       devs_ratio(layers, ColumnRole::Intermediate, k, d, model.var_ratio_mid[d]),
                       spec.gamma_intermediates[d], "ratio_mid:" + panel.intermediates.columns[d]);
    close_skeleton(model);
    return model;
}

} // namespace netsbm
