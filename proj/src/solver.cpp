#include "netsbm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace netsbm {

double SolveOutcome::value(const ConicProgram& program, const std::string& name) const {
    int idx = program.variable_index(name);
    if (idx < 0 || idx >= static_cast<int>(assignment.size()))
        throw std::out_of_range("no value for variable '" + name + "'");
    return assignment[static_cast<size_t>(idx)];
}

std::map<std::string, double> SolveOutcome::assignment_map(const ConicProgram& program) const {
    std::map<std::string, double> out;
    for (size_t i = 0; i < assignment.size(); ++i)
        out[program.variable(static_cast<int>(i)).name] = assignment[i];
    return out;
}

namespace {

double eval_expr(const LinearExpr& e, const std::vector<double>& x) {
    double v = e.constant;
    for (const auto& t : e.terms) v += t.coeff * x[static_cast<size_t>(t.var)];
    return v;
}

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
// A column whose reduced cost is only marginally negative and has no blocking
// row is numerical dust, not a certificate of unboundedness.
constexpr double kUnboundedCostTol = 1e-6;
constexpr int kRepriceInterval = 64;

// Dense tableau over [structural columns | slack columns | artificial columns].
// Rows are equilibrated by the caller. Phase 1 minimises the artificial sum;
// phase 2 forbids artificials from entering, so redundant rows keep their
// artificial basic at zero and the basis stays square. Entering by Bland's
// rule; the leaving row prefers the largest pivot among minimum-ratio ties.
struct Simplex {
    int rows = 0;
    int cols = 0; // total columns excl. rhs
    int art_begin = 0;
    std::vector<std::vector<double>> a; // rows x (cols+1), last entry rhs
    std::vector<double> objrow;         // z_j - c_j, length cols, plus value
    double objval = 0.0;
    std::vector<int> basis; // basic column per row
    std::vector<double> cost;
    int pivots = 0;
    int pivot_budget = 0;

    enum class Result { Optimal, Unbounded, IterLimit };

    void price(const std::vector<double>& c) {
        cost = c;
        objrow.assign(static_cast<size_t>(cols), 0.0);
        objval = 0.0;
        for (int j = 0; j < cols; ++j) objrow[static_cast<size_t>(j)] = -c[static_cast<size_t>(j)];
        for (int i = 0; i < rows; ++i) {
            double cb = c[static_cast<size_t>(basis[static_cast<size_t>(i)])];
            if (cb == 0.0) continue;
            for (int j = 0; j < cols; ++j)
                objrow[static_cast<size_t>(j)] += cb * a[static_cast<size_t>(i)][static_cast<size_t>(j)];
            objval += cb * a[static_cast<size_t>(i)][static_cast<size_t>(cols)];
        }
        // Basic columns are exactly zero in the price row by construction.
        for (int i = 0; i < rows; ++i) objrow[static_cast<size_t>(basis[static_cast<size_t>(i)])] = 0.0;
    }

    void pivot(int r, int c) {
        auto& prow = a[static_cast<size_t>(r)];
        const double piv = prow[static_cast<size_t>(c)];
        for (double& v : prow) v /= piv;
        prow[static_cast<size_t>(c)] = 1.0;
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            double f = a[static_cast<size_t>(i)][static_cast<size_t>(c)];
            if (f == 0.0) continue;
            auto& row = a[static_cast<size_t>(i)];
            for (int j = 0; j <= cols; ++j) row[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
            row[static_cast<size_t>(c)] = 0.0;
        }
        double f = objrow[static_cast<size_t>(c)];
        if (f != 0.0) {
            for (int j = 0; j < cols; ++j)
                objrow[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
            objval -= f * prow[static_cast<size_t>(cols)];
            objrow[static_cast<size_t>(c)] = 0.0;
        }
        basis[static_cast<size_t>(r)] = c;
        ++pivots;
    }

    Result run(bool allow_artificials) {
        std::vector<bool> parked(static_cast<size_t>(cols), false); // dust columns
        int since_reprice = 0;
        // Default leaving rule prefers the most stable pivot among ratio ties;
        // after a long degenerate stall we fall back to Bland's rule (smallest
        // basis index, tight ties) until the objective moves again.
        bool bland = false;
        int stall = 0;
        double last_obj = objval;
        for (;;) {
            if (pivots >= pivot_budget) return Result::IterLimit;
            if (since_reprice >= kRepriceInterval) {
                price(cost); // shed accumulated drift
                since_reprice = 0;
            }
            int enter = -1;
            for (int j = 0; j < cols; ++j) {
                if (!allow_artificials && j >= art_begin) break;
                if (parked[static_cast<size_t>(j)]) continue;
                if (objrow[static_cast<size_t>(j)] < -kReducedCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return Result::Optimal;

            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                double aij = a[static_cast<size_t>(i)][static_cast<size_t>(enter)];
                if (aij <= kPivotTol) continue;
                double ratio = a[static_cast<size_t>(i)][static_cast<size_t>(cols)] / aij;
                if (ratio < 0.0) ratio = 0.0;
                best = std::min(best, ratio);
            }
            int leave = -1;
            if (std::isfinite(best)) {
                if (bland) {
                    const double window = best + 1e-12 * (1.0 + best);
                    for (int i = 0; i < rows; ++i) {
                        double aij = a[static_cast<size_t>(i)][static_cast<size_t>(enter)];
                        if (aij <= kPivotTol) continue;
                        double ratio = a[static_cast<size_t>(i)][static_cast<size_t>(cols)] / aij;
                        if (ratio < 0.0) ratio = 0.0;
                        if (ratio <= window &&
                            (leave < 0 || basis[static_cast<size_t>(i)] <
                                              basis[static_cast<size_t>(leave)]))
                            leave = i;
                    }
                } else {
                    const double window = best + 1e-9 * (1.0 + best);
                    double best_piv = 0.0;
                    for (int i = 0; i < rows; ++i) {
                        double aij = a[static_cast<size_t>(i)][static_cast<size_t>(enter)];
                        if (aij <= kPivotTol) continue;
                        double ratio = a[static_cast<size_t>(i)][static_cast<size_t>(cols)] / aij;
                        if (ratio < 0.0) ratio = 0.0;
                        if (ratio <= window && aij > best_piv) {
                            leave = i;
                            best_piv = aij;
                        }
                    }
                }
            }
            if (leave < 0) {
                if (objrow[static_cast<size_t>(enter)] < -kUnboundedCostTol) return Result::Unbounded;
                parked[static_cast<size_t>(enter)] = true; // not a real ray, just noise
                continue;
            }
            pivot(leave, enter);
            ++since_reprice;
            if (objval > last_obj + 1e-11 * (1.0 + std::abs(last_obj))) {
                last_obj = objval;
                stall = 0;
                bland = false;
            } else if (++stall >= 200) {
                bland = true;
            }
        }
    }
};

struct StandardForm {
    // Mapping from program variables to standardized nonneg columns.
    struct VarMap {
        int pos = -1; // column of positive part
        int neg = -1; // column of negative part (free variables only)
    };
    std::vector<VarMap> vmap;
    int num_structural = 0;
    int num_rows = 0;
    std::vector<std::vector<double>> dense; // rows x structural columns
    std::vector<double> rhs;
    std::vector<Relation> rel;
    std::vector<double> obj; // structural objective (maximisation sign)
    bool negated_sense = false;
    std::vector<int> row_sign; // +1, or -1 when the row was negated for rhs >= 0
};

// Extra rows appended to the program's linear part (outer-approximation cuts,
// artificial variable boxes).
struct ExtraRow {
    LinearExpr expr;
    Relation rel;
    double rhs;
};

StandardForm standardize(const ConicProgram& p, const std::vector<ExtraRow>& extra) {
    StandardForm sf;
    const int n = p.num_variables();
    sf.vmap.resize(static_cast<size_t>(n));
    int col = 0;
    for (int i = 0; i < n; ++i) {
        sf.vmap[static_cast<size_t>(i)].pos = col++;
        if (!p.variable(i).nonneg) sf.vmap[static_cast<size_t>(i)].neg = col++;
    }
    sf.num_structural = col;

    const auto& rows = p.linear_constraints();
    sf.num_rows = static_cast<int>(rows.size() + extra.size());
    sf.dense.assign(static_cast<size_t>(sf.num_rows),
                    std::vector<double>(static_cast<size_t>(sf.num_structural), 0.0));
    sf.rhs.resize(static_cast<size_t>(sf.num_rows));
    sf.rel.resize(static_cast<size_t>(sf.num_rows));
    sf.row_sign.assign(static_cast<size_t>(sf.num_rows), 1);

    auto fill_row = [&](int r, const LinearExpr& e, Relation rel, double rhs) {
        auto& row = sf.dense[static_cast<size_t>(r)];
        for (const auto& t : e.terms) {
            const auto& vm = sf.vmap[static_cast<size_t>(t.var)];
            row[static_cast<size_t>(vm.pos)] += t.coeff;
            if (vm.neg >= 0) row[static_cast<size_t>(vm.neg)] -= t.coeff;
        }
        sf.rhs[static_cast<size_t>(r)] = rhs - e.constant;
        sf.rel[static_cast<size_t>(r)] = rel;
    };
    for (size_t r = 0; r < rows.size(); ++r)
        fill_row(static_cast<int>(r), rows[r].expr, rows[r].rel, rows[r].rhs);
    for (size_t e = 0; e < extra.size(); ++e)
        fill_row(static_cast<int>(rows.size() + e), extra[e].expr, extra[e].rel, extra[e].rhs);

    sf.obj.assign(static_cast<size_t>(sf.num_structural), 0.0);
    const double sign = p.sense() == Sense::Maximize ? 1.0 : -1.0;
    sf.negated_sense = p.sense() == Sense::Minimize;
    for (const auto& t : p.objective().terms) {
        const auto& vm = sf.vmap[static_cast<size_t>(t.var)];
        sf.obj[static_cast<size_t>(vm.pos)] += sign * t.coeff;
        if (vm.neg >= 0) sf.obj[static_cast<size_t>(vm.neg)] -= sign * t.coeff;
    }
    return sf;
}

struct LpResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<double> x;     // program-variable values
    std::vector<double> duals; // per linear row of the ORIGINAL program
    int pivots = 0;
};

LpResult solve_lp(const ConicProgram& p, const std::vector<ExtraRow>& extra, int pivot_budget) {
    StandardForm sf = standardize(p, extra);
    const int m = sf.num_rows;

    // Column layout: structural | one slack per inequality | one artificial per row.
    int num_slacks = 0;
    for (auto r : sf.rel)
        if (r != Relation::Equal) ++num_slacks;

    Simplex sx;
    sx.rows = m;
    sx.art_begin = sf.num_structural + num_slacks;
    sx.cols = sx.art_begin + m;
    sx.pivot_budget = pivot_budget;
    sx.a.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(sx.cols + 1), 0.0));
    sx.basis.resize(static_cast<size_t>(m));

    int slack_col = sf.num_structural;
    std::vector<double> row_scale(static_cast<size_t>(m), 1.0);
    for (int r = 0; r < m; ++r) {
        auto& row = sx.a[static_cast<size_t>(r)];
        // Equilibrate: divide the row by its largest structural coefficient.
        double mag = 0.0;
        for (int j = 0; j < sf.num_structural; ++j)
            mag = std::max(mag, std::abs(sf.dense[static_cast<size_t>(r)][static_cast<size_t>(j)]));
        double scale = mag > 0.0 ? 1.0 / mag : 1.0;
        row_scale[static_cast<size_t>(r)] = scale;

        double sign = sf.rhs[static_cast<size_t>(r)] < 0.0 ? -1.0 : 1.0;
        if (sign < 0.0) sf.row_sign[static_cast<size_t>(r)] = -1;
        for (int j = 0; j < sf.num_structural; ++j)
            row[static_cast<size_t>(j)] =
                sign * scale * sf.dense[static_cast<size_t>(r)][static_cast<size_t>(j)];
        row[static_cast<size_t>(sx.cols)] = sign * scale * sf.rhs[static_cast<size_t>(r)];
        if (sf.rel[static_cast<size_t>(r)] != Relation::Equal) {
            double s = sf.rel[static_cast<size_t>(r)] == Relation::LessEqual ? 1.0 : -1.0;
            row[static_cast<size_t>(slack_col)] = sign * s;
            ++slack_col;
        }
        row[static_cast<size_t>(sx.art_begin + r)] = 1.0;
        sx.basis[static_cast<size_t>(r)] = sx.art_begin + r;
    }

    // Phase 1: maximise -(sum of artificials).
    std::vector<double> c1(static_cast<size_t>(sx.cols), 0.0);
    for (int r = 0; r < m; ++r) c1[static_cast<size_t>(sx.art_begin + r)] = -1.0;
    sx.price(c1);
    auto res = sx.run(true);
    if (res == Simplex::Result::IterLimit) return {SolveStatus::NumericalFailure, {}, {}, sx.pivots};
    if (res == Simplex::Result::Unbounded) return {SolveStatus::NumericalFailure, {}, {}, sx.pivots};
    if (sx.objval < -1e-8) return {SolveStatus::Infeasible, {}, {}, sx.pivots};

    // Drive basic artificials toward structural columns where possible.
    for (int r = 0; r < m; ++r) {
        if (sx.basis[static_cast<size_t>(r)] < sx.art_begin) continue;
        for (int j = 0; j < sx.art_begin; ++j) {
            if (std::abs(sx.a[static_cast<size_t>(r)][static_cast<size_t>(j)]) > 1e-7) {
                sx.pivot(r, j);
                break;
            }
        }
    }

    // Phase 2.
    std::vector<double> c2(static_cast<size_t>(sx.cols), 0.0);
    for (int j = 0; j < sf.num_structural; ++j) c2[static_cast<size_t>(j)] = sf.obj[static_cast<size_t>(j)];
    sx.price(c2);
    res = sx.run(false);
    if (res == Simplex::Result::IterLimit) return {SolveStatus::NumericalFailure, {}, {}, sx.pivots};
    if (res == Simplex::Result::Unbounded) return {SolveStatus::Unbounded, {}, {}, sx.pivots};

    LpResult out;
    out.status = SolveStatus::Optimal;
    out.pivots = sx.pivots;

    std::vector<double> xs(static_cast<size_t>(sx.cols), 0.0);
    for (int r = 0; r < m; ++r)
        xs[static_cast<size_t>(sx.basis[static_cast<size_t>(r)])] =
            sx.a[static_cast<size_t>(r)][static_cast<size_t>(sx.cols)];
    out.x.resize(static_cast<size_t>(p.num_variables()));
    for (int i = 0; i < p.num_variables(); ++i) {
        const auto& vm = sf.vmap[static_cast<size_t>(i)];
        out.x[static_cast<size_t>(i)] = xs[static_cast<size_t>(vm.pos)];
        if (vm.neg >= 0) out.x[static_cast<size_t>(i)] -= xs[static_cast<size_t>(vm.neg)];
    }

    // Duals read off the artificial columns (objrow[a_r] = y_r in the scaled
    // system), mapped back through the row scaling and sign flips.
    const size_t n_orig_rows = p.linear_constraints().size();
    out.duals.resize(n_orig_rows);
    const double sense_sign = sf.negated_sense ? -1.0 : 1.0;
    for (size_t r = 0; r < n_orig_rows; ++r)
        out.duals[r] = sense_sign * static_cast<double>(sf.row_sign[r]) * row_scale[r] *
                       sx.objrow[static_cast<size_t>(sx.art_begin + static_cast<int>(r))];
    return out;
}

} // namespace

double max_violation(const ConicProgram& p, const std::vector<double>& x) {
    double worst = 0.0;
    for (int i = 0; i < p.num_variables(); ++i)
        if (p.variable(i).nonneg) worst = std::max(worst, -x[static_cast<size_t>(i)]);
    for (const auto& row : p.linear_constraints()) {
        double lhs = eval_expr(row.expr, x);
        switch (row.rel) {
            case Relation::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
            case Relation::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
            case Relation::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
        }
    }
    for (const auto& cone : p.soc_constraints()) {
        double norm2 = 0.0;
        for (const auto& member : cone.u) {
            double v = eval_expr(member, x);
            norm2 += v * v;
        }
        worst = std::max(worst, std::sqrt(norm2) - eval_expr(cone.t, x));
    }
    return worst;
}

SolveOutcome solve(const ConicProgram& program, const SolveParams& params) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();

    SolveOutcome out;
    auto finish = [&](SolveOutcome o) {
        o.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        return o;
    };

    if (!validate(program).empty()) return finish(out); // NumericalFailure on malformed input

    std::vector<ExtraRow> cuts;
    const auto& cones = program.soc_constraints();

    // Initial polyhedral relaxation of each cone: t >= 0 and |u_l| <= t.
    for (const auto& cone : cones) {
        LinearExpr neg_t;
        neg_t.constant = -cone.t.constant;
        for (const auto& tm : cone.t.terms) neg_t.add(tm.var, -tm.coeff);
        cuts.push_back({neg_t, Relation::LessEqual, 0.0});
        for (const auto& member : cone.u) {
            for (double s : {1.0, -1.0}) {
                LinearExpr e = neg_t;
                e.constant += s * member.constant;
                for (const auto& tm : member.terms) e.add(tm.var, s * tm.coeff);
                cuts.push_back({e, Relation::LessEqual, 0.0});
            }
        }
    }

    bool boxed = false;
    const double kBox = 1e9;
    int total_pivots = 0;

    for (int round = 0; round <= params.max_cut_rounds; ++round) {
        LpResult lp = solve_lp(program, cuts, params.max_iter - total_pivots);
        total_pivots += lp.pivots;
        out.iterations = total_pivots;

        if (lp.status == SolveStatus::Unbounded) {
            if (cones.empty()) {
                out.status = SolveStatus::Unbounded;
                return finish(out);
            }
            if (boxed) {
                out.status = SolveStatus::NumericalFailure;
                return finish(out);
            }
            // Box every variable and retry; a solution stuck on the box is
            // reported as Unbounded below.
            boxed = true;
            for (int i = 0; i < program.num_variables(); ++i) {
                LinearExpr e;
                e.add(i, 1.0);
                cuts.push_back({e, Relation::LessEqual, kBox});
                if (!program.variable(i).nonneg) {
                    LinearExpr e2;
                    e2.add(i, -1.0);
                    cuts.push_back({e2, Relation::LessEqual, kBox});
                }
            }
            continue;
        }
        if (lp.status != SolveStatus::Optimal) {
            out.status = lp.status;
            return finish(out);
        }

        // Separate violated cones at the current vertex.
        bool added = false;
        for (const auto& cone : cones) {
            std::vector<double> u_hat(cone.u.size());
            double norm2 = 0.0;
            for (size_t l = 0; l < cone.u.size(); ++l) {
                u_hat[l] = eval_expr(cone.u[l], lp.x);
                norm2 += u_hat[l] * u_hat[l];
            }
            double norm = std::sqrt(norm2);
            double t_hat = eval_expr(cone.t, lp.x);
            if (norm - t_hat <= params.cone_tol) continue;
            // Supporting hyperplane at u_hat/||u_hat||: sum g_l u_l(x) <= t(x).
            LinearExpr cut;
            cut.constant = -cone.t.constant;
            for (const auto& tm : cone.t.terms) cut.add(tm.var, -tm.coeff);
            for (size_t l = 0; l < cone.u.size(); ++l) {
                double g = u_hat[l] / norm;
                cut.constant += g * cone.u[l].constant;
                for (const auto& tm : cone.u[l].terms) cut.add(tm.var, g * tm.coeff);
            }
            cuts.push_back({cut, Relation::LessEqual, 0.0});
            added = true;
        }

        if (!added) {
            if (boxed) {
                for (double xi : lp.x) {
                    if (std::abs(xi) >= kBox * 0.99) {
                        out.status = SolveStatus::Unbounded;
                        return finish(out);
                    }
                }
            }
            double viol = max_violation(program, lp.x);
            if (viol > params.tol_feas) {
                out.status = SolveStatus::NumericalFailure;
                return finish(out);
            }
            out.status = SolveStatus::Optimal;
            out.assignment = lp.x;
            out.objective = eval_expr(program.objective(), lp.x);
            if (cones.empty()) out.duals = lp.duals;
            return finish(out);
        }
    }
    out.status = SolveStatus::NumericalFailure;
    return finish(out);
}

std::vector<double> dual_values(const SolveOutcome& outcome, const ConicProgram& program) {
    if (outcome.status != SolveStatus::Optimal)
        throw DualsUnavailable("duals require an Optimal outcome");
    if (!outcome.duals)
        throw DualsUnavailable("backend did not produce duals for this solve");
    if (outcome.duals->size() != program.linear_constraints().size())
        throw DualsUnavailable("dual vector does not match the program");
    return *outcome.duals;
}

} // namespace netsbm
