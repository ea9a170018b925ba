#pragma once

#include "netsbm/conic.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsbm {

struct SolveParams {
    double tol_feas = 1e-7;
    double tol_obj = 1e-6;
    int max_iter = 50000;      // simplex pivots, total across cut rounds
    int max_cut_rounds = 600;  // outer-approximation rounds for SOC constraints
    double cone_tol = 1e-9;    // accepted ||u|| - t violation at termination
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = 0.0;
    std::vector<double> assignment;           // by variable index; empty unless Optimal
    std::optional<std::vector<double>> duals; // by linear-constraint index (LP path only)
    int iterations = 0;
    double wall_seconds = 0.0;

    double value(const ConicProgram& program, const std::string& name) const;
    std::map<std::string, double> assignment_map(const ConicProgram& program) const;
};

/// Reference backend: dense two-phase simplex for the linear part, with
/// outer-approximation cuts for the second-order cones. Statuses are never
/// reported optimistically: an Optimal outcome has been re-checked against
/// every constraint at tol_feas.
SolveOutcome solve(const ConicProgram& program, const SolveParams& params = {});

/// Largest constraint or bound violation of `x` over the whole program.
double max_violation(const ConicProgram& program, const std::vector<double>& x);

class DualsUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Duals of the linear constraints. Convention: in a Max problem the dual of
/// a binding <= row is >= 0 (flipped for Min). Throws DualsUnavailable when
/// the backend could not produce them (cone-constrained solves).
std::vector<double> dual_values(const SolveOutcome& outcome, const ConicProgram& program);

} // namespace netsbm
