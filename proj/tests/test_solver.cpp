#include "netsbm/solver.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace netsbm;

namespace {

ConicProgram one_var(Relation rel, double rhs) {
    ConicProgram p;
    int x = p.add_variable("p");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr row;
    row.add(x, 1.0);
    p.add_constraint(row, Relation::LessEqual, 1.0);
    if (rel == Relation::GreaterEqual) {
        LinearExpr row2;
        row2.add(x, 1.0);
        p.add_constraint(row2, Relation::GreaterEqual, rhs);
    }
    return p;
}

} // namespace

TEST_CASE("max p subject to p <= 1 is Optimal at 1") {
    auto p = one_var(Relation::LessEqual, 0.0);
    auto out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.value(p, "p") == doctest::Approx(1.0));
    CHECK(max_violation(p, out.assignment) <= 1e-9);
}

TEST_CASE("contradictory bounds are Infeasible") {
    auto p = one_var(Relation::GreaterEqual, 2.0); // p <= 1 and p >= 2
    auto out = solve(p);
    CHECK(out.status == SolveStatus::Infeasible);
    CHECK(out.assignment.empty());
}

TEST_CASE("missing upper bound is Unbounded") {
    ConicProgram p;
    int x = p.add_variable("x");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr row;
    row.add(x, 1.0);
    p.add_constraint(row, Relation::GreaterEqual, 1.0);
    CHECK(solve(p).status == SolveStatus::Unbounded);
}

TEST_CASE("second-order cone ||(p,p)|| <= sqrt(2) caps p at 1") {
    ConicProgram p;
    int x = p.add_variable("p");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr u1, u2, t;
    u1.add(x, 1.0);
    u2.add(x, 1.0);
    t.constant = std::sqrt(2.0);
    p.add_soc({u1, u2}, t);

    auto out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    // ||(1,1)|| = sqrt(2) exactly, so the optimum is p = 1.
    CHECK(out.objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(max_violation(p, out.assignment) <= 1e-7);
    CHECK_THROWS_AS(dual_values(out, p), DualsUnavailable);
}

TEST_CASE("minimisation works through the same path") {
    ConicProgram p;
    int x = p.add_variable("x");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Minimize, obj);
    LinearExpr row;
    row.add(x, 1.0);
    p.add_constraint(row, Relation::GreaterEqual, 3.0);
    auto out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(3.0));
    // Convention check: in a Min problem the dual of a binding >= row is >= 0.
    auto duals = dual_values(out, p);
    CHECK(duals[0] == doctest::Approx(1.0));
}

TEST_CASE("dual of a binding row equals the objective gradient") {
    ConicProgram p;
    int x = p.add_variable("x");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr row;
    row.add(x, 1.0);
    p.add_constraint(row, Relation::LessEqual, 3.0);
    LinearExpr loose;
    loose.add(x, 1.0);
    p.add_constraint(loose, Relation::LessEqual, 100.0);

    auto out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    auto duals = dual_values(out, p);
    REQUIRE(duals.size() == 2);
    CHECK(duals[0] == doctest::Approx(1.0));
    CHECK(duals[1] == doctest::Approx(0.0)); // inactive row, complementary slackness
}

TEST_CASE("degenerate identical rows share a unit of dual weight") {
    ConicProgram p;
    int x = p.add_variable("x");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Maximize, obj);
    for (int i = 0; i < 2; ++i) {
        LinearExpr row;
        row.add(x, 1.0);
        p.add_constraint(row, Relation::LessEqual, 3.0);
    }
    auto out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    auto duals = dual_values(out, p);
    CHECK(duals[0] + duals[1] == doctest::Approx(1.0));
    CHECK(duals[0] >= -1e-9);
    CHECK(duals[1] >= -1e-9);
    // The vertex duals enumerate to (1,0) and (0,1); the backend must return
    // one of them.
    bool vertex_a = std::abs(duals[0] - 1.0) < 1e-9 && std::abs(duals[1]) < 1e-9;
    bool vertex_b = std::abs(duals[1] - 1.0) < 1e-9 && std::abs(duals[0]) < 1e-9;
    CHECK((vertex_a || vertex_b));
}

TEST_CASE("duals satisfy sign convention and complementary slackness") {
    // max 3x + 2y st x + y <= 4, x <= 2, y <= 3
    ConicProgram p;
    int x = p.add_variable("x");
    int y = p.add_variable("y");
    LinearExpr obj;
    obj.add(x, 3.0).add(y, 2.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr r0;
    r0.add(x, 1.0).add(y, 1.0);
    p.add_constraint(r0, Relation::LessEqual, 4.0);
    LinearExpr r1;
    r1.add(x, 1.0);
    p.add_constraint(r1, Relation::LessEqual, 2.0);
    LinearExpr r2;
    r2.add(y, 1.0);
    p.add_constraint(r2, Relation::LessEqual, 3.0);

    auto out = solve(p);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(10.0)); // x=2, y=2
    auto duals = dual_values(out, p);
    double slack2 = 3.0 - out.value(p, "y");
    for (double d : duals) CHECK(d >= -1e-9);
    CHECK(duals[2] * slack2 == doctest::Approx(0.0).epsilon(1e-9));
    // Strong duality: b'y == objective.
    CHECK(4.0 * duals[0] + 2.0 * duals[1] + 3.0 * duals[2] == doctest::Approx(10.0));
}

TEST_CASE("an LP forced through the cone path matches the plain LP") {
    ConicProgram lp;
    int x = lp.add_variable("x");
    int y = lp.add_variable("y");
    LinearExpr obj;
    obj.add(x, 3.0).add(y, 5.0);
    lp.set_objective(Sense::Maximize, obj);
    LinearExpr r0;
    r0.add(x, 2.0).add(y, 1.0);
    lp.add_constraint(r0, Relation::LessEqual, 10.0);
    LinearExpr r1;
    r1.add(x, 1.0).add(y, 3.0);
    lp.add_constraint(r1, Relation::LessEqual, 15.0);

    auto direct = solve(lp);
    REQUIRE(direct.status == SolveStatus::Optimal);

    ConicProgram coned = parse_dump(dump(lp));
    LinearExpr zero;
    zero.add(x, 0.0);
    LinearExpr one;
    one.constant = 1.0;
    coned.add_soc({zero}, one); // ||0|| <= 1, vacuous but routes through cuts
    auto via_cones = solve(coned);
    REQUIRE(via_cones.status == SolveStatus::Optimal);
    CHECK(std::abs(direct.objective - via_cones.objective) <= 1e-5);
}

TEST_CASE("solver optimum matches the basic-solution enumeration oracle") {
    // A few dense LPs with equalities, inequalities and a free variable.
    for (uint64_t seed : {11u, 22u, 33u, 44u}) {
        oracles::Rng rng(seed);
        ConicProgram p;
        int a = p.add_variable("a");
        int b = p.add_variable("b");
        int f = p.add_variable("f", /*nonneg=*/false);
        LinearExpr obj;
        obj.add(a, rng.uniform(0.5, 2.0)).add(b, rng.uniform(0.5, 2.0)).add(f, -1.0);
        p.set_objective(Sense::Maximize, obj);
        LinearExpr r0;
        r0.add(a, 1.0).add(b, rng.uniform(0.5, 1.5));
        p.add_constraint(r0, Relation::LessEqual, rng.uniform(4.0, 8.0));
        LinearExpr r1;
        r1.add(a, 1.0).add(f, -1.0);
        p.add_constraint(r1, Relation::Equal, rng.uniform(0.0, 1.0));
        LinearExpr r2;
        r2.add(b, 1.0).add(f, 1.0);
        p.add_constraint(r2, Relation::GreaterEqual, rng.uniform(0.5, 1.0));
        LinearExpr r3;
        r3.add(f, 1.0);
        p.add_constraint(r3, Relation::LessEqual, rng.uniform(2.0, 3.0));

        auto out = solve(p);
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.objective == doctest::Approx(oracles::lp_max_oracle(p)).epsilon(1e-7));
    }
}

TEST_CASE("every Optimal outcome re-verifies against the whole program") {
    oracles::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        ConicProgram p;
        int x = p.add_variable("x");
        int y = p.add_variable("y");
        LinearExpr obj;
        obj.add(x, rng.uniform(-1.0, 2.0)).add(y, rng.uniform(-1.0, 2.0));
        p.set_objective(Sense::Maximize, obj);
        for (int r = 0; r < 4; ++r) {
            LinearExpr row;
            row.add(x, rng.uniform(-1.0, 2.0)).add(y, rng.uniform(-1.0, 2.0));
            p.add_constraint(row, Relation::LessEqual, rng.uniform(1.0, 5.0));
        }
        LinearExpr u;
        u.add(x, 1.0).add(y, 1.0);
        LinearExpr t;
        t.constant = rng.uniform(1.0, 4.0);
        p.add_soc({u}, t);
        auto out = solve(p);
        if (out.status == SolveStatus::Optimal)
            CHECK(max_violation(p, out.assignment) <= 1e-7);
    }
}
