#include "netsbm/conic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace netsbm;

TEST_CASE("validate accepts a well-formed two-variable LP") {
    ConicProgram p;
    int x = p.add_variable("x");
    int y = p.add_variable("y");
    LinearExpr obj;
    obj.add(x, 1.0).add(y, 2.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr row;
    row.add(x, 1.0).add(y, 1.0);
    p.add_constraint(row, Relation::LessEqual, 4.0);
    CHECK(validate(p).empty());
    CHECK(p.is_lp());
}

TEST_CASE("validate flags a row referencing an undeclared variable") {
    ConicProgram p;
    p.add_variable("x");
    LinearExpr obj;
    obj.add(0, 1.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr row;
    row.add(9, 1.0); // never declared
    p.add_constraint(row, Relation::LessEqual, 1.0);
    auto defects = validate(p);
    REQUIRE(defects.size() == 1);
    CHECK(defects[0].constraint_index == 0);
    CHECK(defects[0].message.find("#9") != std::string::npos);
}

TEST_CASE("validate flags non-finite coefficients with the constraint index") {
    ConicProgram p;
    int x = p.add_variable("x");
    LinearExpr obj;
    obj.add(x, 1.0);
    p.set_objective(Sense::Maximize, obj);
    LinearExpr ok;
    ok.add(x, 1.0);
    p.add_constraint(ok, Relation::LessEqual, 1.0);
    LinearExpr bad;
    bad.add(x, std::numeric_limits<double>::quiet_NaN());
    p.add_constraint(bad, Relation::LessEqual, 1.0);
    auto defects = validate(p);
    REQUIRE(defects.size() == 1);
    CHECK(defects[0].constraint_index == 1);
}

TEST_CASE("validate flags duplicate variable names and empty cones") {
    ConicProgram p;
    p.add_variable("x");
    p.add_variable("x");
    p.set_objective(Sense::Minimize, LinearExpr{});
    LinearExpr t;
    t.constant = 1.0;
    p.add_soc({}, t);
    auto defects = validate(p);
    REQUIRE(defects.size() == 2);
}

TEST_CASE("debug dump round-trips structurally and is byte-stable") {
    ConicProgram p;
    int x = p.add_variable("x");
    int y = p.add_variable("y", /*nonneg=*/false);
    LinearExpr obj;
    obj.add(x, 0.1).add(y, -2.5);
    obj.constant = 0.25;
    p.set_objective(Sense::Minimize, obj);
    LinearExpr r1;
    r1.add(x, 1.0 / 3.0).add(y, -7.0);
    p.add_constraint(r1, Relation::GreaterEqual, 1e-9, "tricky row");
    LinearExpr u1;
    u1.add(x, 1.0);
    LinearExpr u2;
    u2.add(y, -0.123456789012345678);
    u2.constant = 4.0;
    LinearExpr t;
    t.add(x, 2.0);
    t.constant = 1.0;
    p.add_soc({u1, u2}, t, "cone0");

    std::string text = dump(p);
    ConicProgram q = parse_dump(text);
    CHECK(structurally_equal(p, q));
    CHECK(dump(q) == text);
    CHECK(dump(parse_dump(dump(q))) == text);
}

TEST_CASE("structural equality notices real differences") {
    ConicProgram a;
    int x = a.add_variable("x");
    LinearExpr obj;
    obj.add(x, 1.0);
    a.set_objective(Sense::Maximize, obj);
    LinearExpr row;
    row.add(x, 1.0);
    a.add_constraint(row, Relation::LessEqual, 3.0);

    ConicProgram b = parse_dump(dump(a));
    CHECK(structurally_equal(a, b));
    LinearExpr extra;
    extra.add(x, 1.0);
    b.add_constraint(extra, Relation::LessEqual, 5.0);
    CHECK(!structurally_equal(a, b));
}
