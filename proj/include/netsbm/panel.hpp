#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsbm {

class PanelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ColumnRole { Input, Intermediate, Desirable, Undesirable };

using Cell = std::optional<double>;

/// One role-homogeneous block of the panel: n rows, fixed column set.
struct PanelBlock {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> cells; // cells[row][col]

    size_t width() const { return columns.size(); }
};

/// Named DMUs with input / intermediate / desirable / undesirable matrices.
/// Immutable by convention: preprocessing returns a new panel.
struct DmuPanel {
    std::vector<std::string> names;
    PanelBlock inputs;
    PanelBlock intermediates;
    PanelBlock desirable;
    PanelBlock undesirable;

    size_t n() const { return names.size(); }
    size_t m() const { return inputs.width(); }
    size_t d() const { return intermediates.width(); }
    size_t s1() const { return desirable.width(); }
    size_t s2() const { return undesirable.width(); }

    bool complete() const;          // every cell present
    bool strictly_positive() const; // complete and every value > 0
    double at(ColumnRole role, size_t row, size_t col) const;
    const PanelBlock& block(ColumnRole role) const;
    PanelBlock& block(ColumnRole role);
};

struct PanelSchema {
    std::string name_column;
    std::map<std::string, ColumnRole> roles;
    char delimiter = ',';
};

/// Parse a delimited header+rows stream. Blank/"NA"/"NaN" cells (case
/// insensitive) become Missing; any other non-numeric cell is an error.
DmuPanel load_panel(std::istream& source, const PanelSchema& schema);

enum class Imputer { ColumnMean, LinearRegressionOnComplete };

struct ImputeOptions {
    Imputer strategy = Imputer::ColumnMean;
    // Predictor column for the regression imputer; when empty the first fully
    // present column of the same matrix is used.
    std::string predictor;
};

/// Deterministic imputation. Present cells are never altered; idempotent.
DmuPanel impute_missing(const DmuPanel& panel, const ImputeOptions& options,
                        std::vector<std::string>* warnings = nullptr);

/// Directions to the ideal point, computed from the original values:
/// inputs ideal at the column minimum, outputs (intermediates included) at
/// the column maximum.
struct RangeDirection {
    std::vector<std::vector<double>> inputs;        // n x m, v - colmin
    std::vector<std::vector<double>> intermediates; // n x d, colmax - v
    std::vector<std::vector<double>> desirable;     // n x s1
    std::vector<std::vector<double>> undesirable;   // n x s2
};

struct IdealPoint {
    std::vector<double> inputs;        // column minima
    std::vector<double> intermediates; // column maxima
    std::vector<double> desirable;
    std::vector<double> undesirable;
};

struct TransformResult {
    DmuPanel panel;
    RangeDirection direction;
    IdealPoint ideal;
    std::vector<std::string> shifted_columns;
};

/// Shift every column containing a non-positive value so its minimum maps to
/// epsilon_shift; strictly positive columns are untouched. Errors on constant
/// non-positive columns.
TransformResult range_directional_transform(const DmuPanel& panel, double epsilon_shift = 1.0);

struct PreprocessResult {
    DmuPanel panel;
    RangeDirection direction;
    IdealPoint ideal;
    std::vector<std::string> shifted_columns;
    std::vector<std::string> warnings;
};

/// impute_missing followed by range_directional_transform.
PreprocessResult preprocess(const DmuPanel& panel, const ImputeOptions& options,
                            double epsilon_shift = 1.0);

} // namespace netsbm
