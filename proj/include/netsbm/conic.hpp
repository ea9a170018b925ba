#pragma once

#include <string>
#include <vector>

namespace netsbm {

enum class Sense { Maximize, Minimize };
enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
    int var = -1;
    double coeff = 0.0;
};

/// Affine expression: sum of coefficient*variable plus a constant offset.
struct LinearExpr {
    std::vector<LinearTerm> terms;
    double constant = 0.0;

    LinearExpr& add(int var, double coeff) {
        terms.push_back({var, coeff});
        return *this;
    }
};

struct LinearConstraint {
    LinearExpr expr;
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
    std::string label;
};

/// Second-order cone constraint ||u(vars)||_2 <= t(vars), every member affine.
struct SocConstraint {
    std::vector<LinearExpr> u;
    LinearExpr t;
    std::string label;
};

struct Variable {
    std::string name;
    bool nonneg = true; // lower bound 0; otherwise free
};

/// Solver-agnostic program: variables, linear objective, linear rows,
/// second-order cone rows. Empty soc_constraints means plain LP.
class ConicProgram {
public:
    int add_variable(std::string name, bool nonneg = true);
    void set_objective(Sense sense, LinearExpr expr);
    int add_constraint(LinearExpr expr, Relation rel, double rhs, std::string label = {});
    int add_soc(std::vector<LinearExpr> u, LinearExpr t, std::string label = {});

    int num_variables() const { return static_cast<int>(vars_.size()); }
    const std::vector<Variable>& variables() const { return vars_; }
    const Variable& variable(int i) const { return vars_[static_cast<size_t>(i)]; }
    int variable_index(const std::string& name) const; // -1 when absent

    Sense sense() const { return sense_; }
    const LinearExpr& objective() const { return objective_; }
    const std::vector<LinearConstraint>& linear_constraints() const { return rows_; }
    const std::vector<SocConstraint>& soc_constraints() const { return cones_; }
    bool is_lp() const { return cones_.empty(); }

private:
    std::vector<Variable> vars_;
    Sense sense_ = Sense::Maximize;
    LinearExpr objective_;
    std::vector<LinearConstraint> rows_;
    std::vector<SocConstraint> cones_;
};

/// One structural problem found by validate(); indices are -1 when not applicable.
struct Defect {
    std::string message;
    int constraint_index = -1;
    int variable_index = -1;
};

/// Total function: returns every invariant violation (duplicate names,
/// out-of-range variable references, non-finite coefficients).
std::vector<Defect> validate(const ConicProgram& program);

/// Deterministic line-oriented text form, byte-stable for equal input.
std::string dump(const ConicProgram& program);
ConicProgram parse_dump(const std::string& text);
bool structurally_equal(const ConicProgram& a, const ConicProgram& b);

} // namespace netsbm
