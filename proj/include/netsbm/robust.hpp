#pragma once

#include "netsbm/panel.hpp"
#include "netsbm/sbm.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsbm {

class RobustError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One additive deviation layer: full matrices aligned with the panel.
struct LayerValues {
    std::vector<std::vector<double>> inputs;        // n x m
    std::vector<std::vector<double>> intermediates; // n x d
    std::vector<std::vector<double>> desirable;     // n x s1
    std::vector<std::vector<double>> undesirable;   // n x s2
};

struct DeviationLayers {
    int L = 0;
    std::vector<LayerValues> layers;

    double at(ColumnRole role, int layer, size_t row, size_t col) const;
    bool family_all_zero(ColumnRole role) const;
};

/// v^l = fraction_l * v0, exactly.
struct PercentOfNominal {
    std::vector<double> fractions;
};

struct ExplicitTable {
    std::vector<LayerValues> layers;
};

DeviationLayers make_layers(const DmuPanel& panel, const PercentOfNominal& generator);
DeviationLayers make_layers(const DmuPanel& panel, const ExplicitTable& generator);

/// Per-row 2-norm radii, one entry per input / intermediate / output row.
struct EllipsoidalSpec {
    std::vector<double> omega_inputs;
    std::vector<double> omega_intermediates;
    std::vector<double> omega_desirable;
    std::vector<double> omega_undesirable;

    static EllipsoidalSpec uniform(const DmuPanel& panel, double omega);
};

/// {zeta | H zeta + q >= 0}, H is K x L.
struct PolyhedralFamily {
    std::vector<std::vector<double>> h;
    std::vector<double> q;
};

struct PolyhedralSpec {
    std::optional<PolyhedralFamily> inputs;
    std::optional<PolyhedralFamily> intermediates;
    std::optional<PolyhedralFamily> desirable;
    std::optional<PolyhedralFamily> undesirable;
};

/// [-delta_lo, +delta_hi]^L box written as H zeta + q >= 0.
PolyhedralFamily box_family(int L, double lo, double hi);
/// Box forcing zeta = 0 (singleton set; robust model collapses to crisp).
PolyhedralFamily singleton_family(int L);

/// Rejects vacuous specs: empty or unbounded polyhedra, zero H, bad shapes.
void validate_polyhedral_family(const PolyhedralFamily& family, int L, const std::string& name);

/// Per-row budgets over {zeta in [0,1]^L : ||zeta||_1 <= Gamma}, the set the
/// tractable budget counterpart dualizes.
struct BudgetSpec {
    std::vector<double> gamma_inputs;
    std::vector<double> gamma_intermediates;
    std::vector<double> gamma_desirable;
    std::vector<double> gamma_undesirable;

    static BudgetSpec uniform(const DmuPanel& panel, double gamma);
};

SbmModel build_robust_stage1_ellipsoidal(const DmuPanel& panel, size_t k,
                                         const DeviationLayers& layers, const EllipsoidalSpec& spec);
SbmModel build_robust_stage2_ellipsoidal(const DmuPanel& panel, size_t k,
                                         const DeviationLayers& layers, const EllipsoidalSpec& spec);
SbmModel build_robust_stage1_polyhedral(const DmuPanel& panel, size_t k,
                                        const DeviationLayers& layers, const PolyhedralSpec& spec);
SbmModel build_robust_stage2_polyhedral(const DmuPanel& panel, size_t k,
                                        const DeviationLayers& layers, const PolyhedralSpec& spec);
SbmModel build_robust_stage1_budget(const DmuPanel& panel, size_t k, const DeviationLayers& layers,
                                    const BudgetSpec& spec);
SbmModel build_robust_stage2_budget(const DmuPanel& panel, size_t k, const DeviationLayers& layers,
                                    const BudgetSpec& spec);

} // namespace netsbm
