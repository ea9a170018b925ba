#pragma once

#include "netsbm/conic.hpp"
#include "netsbm/panel.hpp"
#include "netsbm/solver.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsbm {

class SbmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StageRole { Stage1, Stage2, BlackBox };

/// Equality: the textbook LP with equality balance rows.
/// Relaxed: normalization and balance rows relaxed to inequalities (same
///          optimum; the form whose rows admit row-wise uncertainty).
/// RobustReady: Relaxed plus explicit objective variable w and slack-ratio
///          variables, the skeleton the robust counterparts extend.
enum class SbmForm { Equality, Relaxed, RobustReady };

/// A built stage program plus the variable indices needed for extraction
/// and for the robust builders.
struct SbmModel {
    ConicProgram program;
    StageRole stage = StageRole::BlackBox;
    SbmForm form = SbmForm::Equality;
    int dmu = -1;

    int var_w = -1; // RobustReady only
    int var_p = -1;
    std::vector<int> var_lambda;
    std::vector<int> var_slack_in;   // inputs (stage 1 / black box)
    std::vector<int> var_slack_mid;  // intermediates
    std::vector<int> var_slack_good; // desirable outputs
    std::vector<int> var_slack_bad;  // undesirable outputs
    std::vector<int> var_ratio_in;   // a_ik
    std::vector<int> var_ratio_mid;  // b_dk
    std::vector<int> var_ratio_good; // c_{r1 k}
    std::vector<int> var_ratio_bad;  // c_{r2 k}
};

// Smallest admissible p (strict p > 0 is not representable in an LP).
inline constexpr double kEpsilonP = 1e-9;

SbmModel build_blackbox_sbm(const DmuPanel& panel, size_t k);
SbmModel build_undesirable_sbm(const DmuPanel& panel, size_t k);
SbmModel build_stage1(const DmuPanel& panel, size_t k, SbmForm form);
SbmModel build_stage2(const DmuPanel& panel, size_t k, SbmForm form);

enum class Classification { Efficient, Inefficient };

struct StageSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    double w = 0.0;
    double eff = 0.0; // 1/w, clamped to 1 inside tol_eff
    Classification classification = Classification::Inefficient;
    std::map<std::string, double> slacks;
    std::map<std::string, double> lambda;
    std::vector<std::string> warnings;
};

inline constexpr double kDefaultTolEff = 1e-4;

/// Pulls w, Eff = 1/w, slacks and intensities out of an Optimal outcome.
/// Non-Optimal outcomes produce a failure record, never a throw.
StageSolution extract_solution(const SolveOutcome& outcome, const SbmModel& model,
                               double tol_eff = kDefaultTolEff);

double overall_efficiency(const StageSolution& stage1, const StageSolution& stage2);
bool overall_efficient(const StageSolution& stage1, const StageSolution& stage2);

} // namespace netsbm
