#include "netsbm/robust.hpp"

#include "netsbm/solver.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace netsbm;

namespace {

double solved_w(const SbmModel& model) {
    auto out = solve(model.program);
    REQUIRE(out.status == SolveStatus::Optimal);
    return out.objective;
}

DmuPanel small_panel(uint64_t seed) { return oracles::random_panel(seed, 4, 2, 1, 1, 1); }

DeviationLayers ten_twenty(const DmuPanel& p) {
    return make_layers(p, PercentOfNominal{{0.10, 0.20}});
}

PolyhedralSpec sym_box_spec(int L, double delta) {
    PolyhedralSpec s;
    s.inputs = box_family(L, delta, delta);
    s.intermediates = box_family(L, delta, delta);
    s.desirable = box_family(L, delta, delta);
    s.undesirable = box_family(L, delta, delta);
    return s;
}

} // namespace

TEST_CASE("percent-of-nominal layers are exact multiples") {
    auto p = oracles::random_panel(1, 2, 1, 1, 1, 1);
    p.inputs.cells[0][0] = 50.0;
    p.desirable.cells[1][0] = 0.0; // certain datum
    auto layers = make_layers(p, PercentOfNominal{{0.1, 0.2}});
    CHECK(layers.L == 2);
    CHECK(layers.at(ColumnRole::Input, 0, 0, 0) == 5.0);
    CHECK(layers.at(ColumnRole::Input, 1, 0, 0) == 10.0);
    CHECK(layers.at(ColumnRole::Desirable, 0, 1, 0) == 0.0);
    CHECK(layers.at(ColumnRole::Desirable, 1, 1, 0) == 0.0);
}

TEST_CASE("empty generator yields L = 0 and robust builders refuse it") {
    auto p = small_panel(3);
    auto layers = make_layers(p, PercentOfNominal{{}});
    CHECK(layers.L == 0);
    auto espec = EllipsoidalSpec::uniform(p, 1.0);
    CHECK_THROWS_AS(build_robust_stage1_ellipsoidal(p, 0, layers, espec), RobustError);
    auto bspec = BudgetSpec::uniform(p, 0.0);
    CHECK_THROWS_AS(build_robust_stage2_budget(p, 0, layers, bspec), RobustError);
}

TEST_CASE("explicit tables must cover every cell") {
    auto p = small_panel(4);
    ExplicitTable t;
    t.layers.resize(1);
    t.layers[0].inputs.assign(p.n(), std::vector<double>(p.m(), 1.0));
    t.layers[0].intermediates.assign(p.n() - 1, std::vector<double>(p.d(), 1.0)); // short a row
    t.layers[0].desirable.assign(p.n(), std::vector<double>(p.s1(), 1.0));
    t.layers[0].undesirable.assign(p.n(), std::vector<double>(p.s2(), 1.0));
    CHECK_THROWS_AS(make_layers(p, t), RobustError);
}

TEST_CASE("spec shape and sign validation") {
    auto p = small_panel(5);
    auto layers = ten_twenty(p);
    EllipsoidalSpec e = EllipsoidalSpec::uniform(p, 1.0);
    e.omega_inputs.pop_back();
    CHECK_THROWS_AS(build_robust_stage1_ellipsoidal(p, 0, layers, e), RobustError);
    e = EllipsoidalSpec::uniform(p, -0.5);
    CHECK_THROWS_AS(build_robust_stage1_ellipsoidal(p, 0, layers, e), RobustError);

    BudgetSpec b = BudgetSpec::uniform(p, -1.0);
    CHECK_THROWS_AS(build_robust_stage1_budget(p, 0, layers, b), RobustError);
    b = BudgetSpec::uniform(p, 3.0); // L = 2
    CHECK_THROWS_AS(build_robust_stage1_budget(p, 0, layers, b), RobustError);
}

TEST_CASE("zero-size uncertainty reproduces the crisp substituted optimum") {
    for (uint64_t seed : {7u, 8u, 9u}) {
        auto p = small_panel(seed);
        auto layers = ten_twenty(p);
        auto singleton = PolyhedralSpec{};
        singleton.inputs = singleton_family(layers.L);
        singleton.intermediates = singleton_family(layers.L);
        singleton.desirable = singleton_family(layers.L);
        singleton.undesirable = singleton_family(layers.L);

        for (size_t k = 0; k < p.n(); ++k) {
            double crisp1 = solved_w(build_stage1(p, k, SbmForm::RobustReady));
            double crisp2 = solved_w(build_stage2(p, k, SbmForm::RobustReady));

            auto e0 = EllipsoidalSpec::uniform(p, 0.0);
            CHECK(std::abs(solved_w(build_robust_stage1_ellipsoidal(p, k, layers, e0)) - crisp1) <=
                  1e-6);
            CHECK(std::abs(solved_w(build_robust_stage2_ellipsoidal(p, k, layers, e0)) - crisp2) <=
                  1e-6);

            CHECK(std::abs(solved_w(build_robust_stage1_polyhedral(p, k, layers, singleton)) -
                           crisp1) <= 1e-6);
            CHECK(std::abs(solved_w(build_robust_stage2_polyhedral(p, k, layers, singleton)) -
                           crisp2) <= 1e-6);

            auto g0 = BudgetSpec::uniform(p, 0.0);
            CHECK(std::abs(solved_w(build_robust_stage1_budget(p, k, layers, g0)) - crisp1) <= 1e-6);
            CHECK(std::abs(solved_w(build_robust_stage2_budget(p, k, layers, g0)) - crisp2) <= 1e-6);
        }
    }
}

TEST_CASE("ellipsoidal protection never lowers the efficiency") {
    for (uint64_t seed : {11u, 12u}) {
        auto p = small_panel(seed);
        auto layers = ten_twenty(p);
        auto e1 = EllipsoidalSpec::uniform(p, 1.0);
        for (size_t k = 0; k < p.n(); ++k) {
            double crisp1 = solved_w(build_stage1(p, k, SbmForm::RobustReady));
            double rob1 = solved_w(build_robust_stage1_ellipsoidal(p, k, layers, e1));
            CHECK(rob1 <= crisp1 + 1e-7); // max w shrinks, Eff = 1/w grows
            CHECK(1.0 / rob1 >= 1.0 / crisp1 - 1e-7);
            CHECK(1.0 / rob1 <= 1.0 + 1e-4);

            double crisp2 = solved_w(build_stage2(p, k, SbmForm::RobustReady));
            double rob2 = solved_w(build_robust_stage2_ellipsoidal(p, k, layers, e1));
            CHECK(1.0 / rob2 >= 1.0 / crisp2 - 1e-7);
            CHECK(1.0 / rob2 <= 1.0 + 1e-4);
        }
    }
}

TEST_CASE("efficiency is monotone in the ellipsoid radius") {
    auto p = small_panel(13);
    auto layers = ten_twenty(p);
    for (size_t k = 0; k < p.n(); ++k) {
        double prev1 = 0.0, prev2 = 0.0;
        for (double omega : {0.0, 0.5, 1.0}) {
            auto spec = EllipsoidalSpec::uniform(p, omega);
            double e1 = 1.0 / solved_w(build_robust_stage1_ellipsoidal(p, k, layers, spec));
            double e2 = 1.0 / solved_w(build_robust_stage2_ellipsoidal(p, k, layers, spec));
            CHECK(e1 >= prev1 - 1e-6);
            CHECK(e2 >= prev2 - 1e-6);
            prev1 = e1;
            prev2 = e2;
        }
    }
}

TEST_CASE("a lone DMU stays efficient under any radius: its own deviations cancel") {
    auto p = oracles::random_panel(17, 1, 2, 1, 1, 1);
    auto layers = ten_twenty(p);
    auto spec = EllipsoidalSpec::uniform(p, 1.0);
    auto m1 = build_robust_stage1_ellipsoidal(p, 0, layers, spec);
    auto out1 = solve(m1.program);
    REQUIRE(out1.status == SolveStatus::Optimal);
    CHECK(out1.objective == doctest::Approx(1.0).epsilon(1e-7));
    // At lambda_k = p the balance protection vector is identically zero.
    std::vector<double> x(static_cast<size_t>(m1.program.num_variables()), 0.0);
    x[static_cast<size_t>(m1.var_p)] = 1.0;
    x[static_cast<size_t>(m1.var_lambda[0])] = 1.0;
    x[static_cast<size_t>(m1.var_w)] = 1.0;
    CHECK(max_violation(m1.program, x) <= 1e-12);

    auto m2 = build_robust_stage2_ellipsoidal(p, 0, layers, spec);
    auto out2 = solve(m2.program);
    REQUIRE(out2.status == SolveStatus::Optimal);
    CHECK(out2.objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("Monte-Carlo certificate: sampled perturbations never break feasibility") {
    auto p = small_panel(19);
    auto layers = ten_twenty(p);
    auto spec = EllipsoidalSpec::uniform(p, 1.0);
    for (size_t k = 0; k < 2; ++k) {
        auto m1 = build_robust_stage1_ellipsoidal(p, k, layers, spec);
        auto o1 = solve(m1.program);
        REQUIRE(o1.status == SolveStatus::Optimal);
        CHECK(oracles::ellipsoidal_mc_violation(p, k, layers, spec, m1, o1.assignment, 1000,
                                                101 + k) <= 1e-7);
        auto m2 = build_robust_stage2_ellipsoidal(p, k, layers, spec);
        auto o2 = solve(m2.program);
        REQUIRE(o2.status == SolveStatus::Optimal);
        CHECK(oracles::ellipsoidal_mc_violation(p, k, layers, spec, m2, o2.assignment, 1000,
                                                202 + k) <= 1e-7);
    }
}

TEST_CASE("polyhedral box protection raises efficiency; bigger boxes raise it further") {
    auto p = small_panel(23);
    auto layers = ten_twenty(p);
    auto small_box = sym_box_spec(layers.L, 0.5);
    auto big_box = sym_box_spec(layers.L, 1.0);
    for (size_t k = 0; k < p.n(); ++k) {
        double crisp1 = 1.0 / solved_w(build_stage1(p, k, SbmForm::RobustReady));
        double small1 = 1.0 / solved_w(build_robust_stage1_polyhedral(p, k, layers, small_box));
        double big1 = 1.0 / solved_w(build_robust_stage1_polyhedral(p, k, layers, big_box));
        CHECK(small1 >= crisp1 - 1e-7);
        CHECK(big1 >= small1 - 1e-7); // nested sets order the optima
        CHECK(big1 <= 1.0 + 1e-4);

        double crisp2 = 1.0 / solved_w(build_stage2(p, k, SbmForm::RobustReady));
        double small2 = 1.0 / solved_w(build_robust_stage2_polyhedral(p, k, layers, small_box));
        double big2 = 1.0 / solved_w(build_robust_stage2_polyhedral(p, k, layers, big_box));
        CHECK(small2 >= crisp2 - 1e-7);
        CHECK(big2 >= small2 - 1e-7);
    }
}

TEST_CASE("vacuous or malformed polyhedral specs are refused") {
    auto p = small_panel(29);
    auto layers = ten_twenty(p);

    PolyhedralSpec zero_h = sym_box_spec(layers.L, 1.0);
    for (auto& row : zero_h.inputs->h)
        for (auto& v : row) v = 0.0;
    CHECK_THROWS_WITH_AS(build_robust_stage1_polyhedral(p, 0, layers, zero_h),
                         doctest::Contains("vacuous"), RobustError);

    PolyhedralSpec bad_dims = sym_box_spec(layers.L, 1.0);
    bad_dims.inputs->h[0].push_back(1.0); // columns != L
    CHECK_THROWS_WITH_AS(build_robust_stage1_polyhedral(p, 0, layers, bad_dims),
                         doctest::Contains("do not match L"), RobustError);

    PolyhedralSpec missing = sym_box_spec(layers.L, 1.0);
    missing.inputs.reset();
    CHECK_THROWS_WITH_AS(build_robust_stage1_polyhedral(p, 0, layers, missing),
                         doctest::Contains("missing"), RobustError);

    PolyhedralSpec empty_set = sym_box_spec(layers.L, 1.0);
    empty_set.inputs = box_family(layers.L, -1.0, -1.0); // zeta <= -1 and zeta >= 1
    CHECK_THROWS_WITH_AS(build_robust_stage1_polyhedral(p, 0, layers, empty_set),
                         doctest::Contains("empty"), RobustError);

    PolyhedralSpec unbounded = sym_box_spec(layers.L, 1.0);
    unbounded.inputs->h.resize(layers.L); // keep only zeta >= -1 rows
    unbounded.inputs->q.resize(static_cast<size_t>(layers.L));
    CHECK_THROWS_WITH_AS(build_robust_stage1_polyhedral(p, 0, layers, unbounded),
                         doctest::Contains("unbounded"), RobustError);
}

TEST_CASE("missing family is fine when that family has no deviations") {
    auto p = small_panel(31);
    ExplicitTable t;
    t.layers.resize(1);
    t.layers[0].inputs.assign(p.n(), std::vector<double>(p.m(), 0.0)); // inputs certain
    t.layers[0].intermediates.assign(p.n(), std::vector<double>(p.d(), 2.0));
    t.layers[0].desirable.assign(p.n(), std::vector<double>(p.s1(), 0.0));
    t.layers[0].undesirable.assign(p.n(), std::vector<double>(p.s2(), 0.0));
    auto layers = make_layers(p, t);
    PolyhedralSpec spec;
    spec.intermediates = box_family(layers.L, 1.0, 1.0);
    double w = solved_w(build_robust_stage1_polyhedral(p, 0, layers, spec));
    CHECK(w >= 1.0 - 1e-9);
}

TEST_CASE("budget counterpart at full budget equals the vertex-enumeration oracle") {
    for (uint64_t seed : {37u, 38u}) {
        auto p = small_panel(seed);
        auto layers = ten_twenty(p);
        auto full = BudgetSpec::uniform(p, 2.0); // Gamma = L
        for (size_t k = 0; k < p.n(); ++k) {
            double dual1 = solved_w(build_robust_stage1_budget(p, k, layers, full));
            auto oracle1 = oracles::budget_enumeration_oracle(p, k, layers, 2, StageRole::Stage1);
            auto o1 = solve(oracle1);
            REQUIRE(o1.status == SolveStatus::Optimal);
            CHECK(std::abs(dual1 - o1.objective) <= 1e-6);

            double dual2 = solved_w(build_robust_stage2_budget(p, k, layers, full));
            auto oracle2 = oracles::budget_enumeration_oracle(p, k, layers, 2, StageRole::Stage2);
            auto o2 = solve(oracle2);
            REQUIRE(o2.status == SolveStatus::Optimal);
            CHECK(std::abs(dual2 - o2.objective) <= 1e-6);
        }
    }
}

TEST_CASE("budget counterpart matches the oracle at intermediate integer budgets") {
    auto p = small_panel(41);
    auto layers = ten_twenty(p);
    for (int gamma : {0, 1, 2}) {
        auto spec = BudgetSpec::uniform(p, static_cast<double>(gamma));
        for (size_t k = 0; k < 2; ++k) {
            double dual = solved_w(build_robust_stage1_budget(p, k, layers, spec));
            auto o = solve(oracles::budget_enumeration_oracle(p, k, layers, gamma, StageRole::Stage1));
            REQUIRE(o.status == SolveStatus::Optimal);
            CHECK(std::abs(dual - o.objective) <= 1e-6);
        }
    }
}

TEST_CASE("efficiency is monotone in the budget") {
    auto p = small_panel(43);
    auto layers = ten_twenty(p);
    for (size_t k = 0; k < p.n(); ++k) {
        double prev1 = 0.0, prev2 = 0.0;
        for (double gamma : {0.0, 0.5, 1.0, 2.0}) {
            auto spec = BudgetSpec::uniform(p, gamma);
            double e1 = 1.0 / solved_w(build_robust_stage1_budget(p, k, layers, spec));
            double e2 = 1.0 / solved_w(build_robust_stage2_budget(p, k, layers, spec));
            CHECK(e1 >= prev1 - 1e-6);
            CHECK(e2 >= prev2 - 1e-6);
            CHECK(e1 <= 1.0 + 1e-4);
            CHECK(e2 <= 1.0 + 1e-4);
            prev1 = e1;
            prev2 = e2;
        }
    }
}

TEST_CASE("budget at full budget and the [0,1]-box polyhedron agree") {
    // Both dualize the same effective set, through different machinery.
    auto p = small_panel(47);
    auto layers = ten_twenty(p);
    auto full = BudgetSpec::uniform(p, 2.0);
    PolyhedralSpec box01;
    box01.inputs = box_family(layers.L, 0.0, 1.0);
    box01.intermediates = box_family(layers.L, 0.0, 1.0);
    box01.desirable = box_family(layers.L, 0.0, 1.0);
    box01.undesirable = box_family(layers.L, 0.0, 1.0);
    for (size_t k = 0; k < p.n(); ++k) {
        CHECK(std::abs(solved_w(build_robust_stage1_budget(p, k, layers, full)) -
                       solved_w(build_robust_stage1_polyhedral(p, k, layers, box01))) <= 1e-6);
        CHECK(std::abs(solved_w(build_robust_stage2_budget(p, k, layers, full)) -
                       solved_w(build_robust_stage2_polyhedral(p, k, layers, box01))) <= 1e-6);
    }
}

TEST_CASE("all six builders keep Eff within (0, 1 + tol] on random panels") {
    for (uint64_t seed = 51; seed <= 58; ++seed) {
        auto p = oracles::random_panel(seed, 2 + seed % 4, 1 + seed % 2, 1 + seed % 2, 1, seed % 2);
        auto layers = ten_twenty(p);
        auto espec = EllipsoidalSpec::uniform(p, 1.0);
        auto bspec = BudgetSpec::uniform(p, 1.0);
        auto pspec = sym_box_spec(layers.L, 1.0);
        for (size_t k = 0; k < p.n(); ++k) {
            for (double w : {solved_w(build_robust_stage1_ellipsoidal(p, k, layers, espec)),
                             solved_w(build_robust_stage2_ellipsoidal(p, k, layers, espec)),
                             solved_w(build_robust_stage1_polyhedral(p, k, layers, pspec)),
                             solved_w(build_robust_stage2_polyhedral(p, k, layers, pspec)),
                             solved_w(build_robust_stage1_budget(p, k, layers, bspec)),
                             solved_w(build_robust_stage2_budget(p, k, layers, bspec))}) {
                double eff = 1.0 / w;
                CHECK(eff > 0.0);
                CHECK(eff <= 1.0 + 1e-4);
            }
        }
    }
}
