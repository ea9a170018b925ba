#include "netsbm/panel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

namespace netsbm {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool is_missing_sentinel(const std::string& raw) {
    std::string t = lower(trim(raw));
    return t.empty() || t == "na" || t == "nan";
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

bool DmuPanel::complete() const {
    for (const auto* b : {&inputs, &intermediates, &desirable, &undesirable})
        for (const auto& row : b->cells)
            for (const auto& c : row)
                if (!c.has_value()) return false;
    return true;
}

bool DmuPanel::strictly_positive() const {
    for (const auto* b : {&inputs, &intermediates, &desirable, &undesirable})
        for (const auto& row : b->cells)
            for (const auto& c : row)
                if (!c.has_value() || *c <= 0.0) return false;
    return true;
}

const PanelBlock& DmuPanel::block(ColumnRole role) const {
    switch (role) {
        case ColumnRole::Input: return inputs;
        case ColumnRole::Intermediate: return intermediates;
        case ColumnRole::Desirable: return desirable;
        case ColumnRole::Undesirable: return undesirable;
    }
    throw PanelError("bad column role");
}

PanelBlock& DmuPanel::block(ColumnRole role) {
    return const_cast<PanelBlock&>(static_cast<const DmuPanel&>(*this).block(role));
}

double DmuPanel::at(ColumnRole role, size_t row, size_t col) const {
    const Cell& c = block(role).cells.at(row).at(col);
    if (!c.has_value()) throw PanelError("missing cell accessed as value");
    return *c;
}

DmuPanel load_panel(std::istream& source, const PanelSchema& schema) {
    std::string line;
    if (!std::getline(source, line)) throw PanelError("empty panel stream");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_line(line, schema.delimiter);
    for (auto& h : header) h = trim(h);

    int name_col = -1;
    // For each file column: role and target position within its block.
    std::vector<std::pair<ColumnRole, size_t>> layout(header.size());
    std::vector<bool> is_data(header.size(), false);

    DmuPanel panel;
    std::set<std::string> seen_roles;
    for (size_t c = 0; c < header.size(); ++c) {
        if (header[c] == schema.name_column) {
            if (name_col >= 0) throw PanelError("name column '" + schema.name_column + "' appears twice");
            name_col = static_cast<int>(c);
            continue;
        }
        auto it = schema.roles.find(header[c]);
        if (it == schema.roles.end())
            throw PanelError("column '" + header[c] + "' has no role in the schema");
        PanelBlock& blk = panel.block(it->second);
        layout[c] = {it->second, blk.columns.size()};
        blk.columns.push_back(header[c]);
        is_data[c] = true;
        seen_roles.insert(header[c]);
    }
    if (name_col < 0)
        throw PanelError("name column '" + schema.name_column + "' not found in header");
    for (const auto& [col, role] : schema.roles) {
        (void)role;
        if (!seen_roles.count(col))
            throw PanelError("schema references absent column '" + col + "'");
    }

    size_t lineno = 1;
    std::set<std::string> seen_names;
    while (std::getline(source, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_line(line, schema.delimiter);
        if (fields.size() != header.size())
            throw PanelError("row " + std::to_string(lineno) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));

        std::string name = trim(fields[static_cast<size_t>(name_col)]);
        if (name.empty()) throw PanelError("row " + std::to_string(lineno) + " has empty DMU name");
        if (!seen_names.insert(name).second)
            throw PanelError("duplicate DMU name '" + name + "'");
        panel.names.push_back(name);

        for (auto* b : {&panel.inputs, &panel.intermediates, &panel.desirable, &panel.undesirable})
            b->cells.emplace_back(b->columns.size());

        for (size_t c = 0; c < fields.size(); ++c) {
            if (!is_data[c]) continue;
            auto [role, pos] = layout[c];
            Cell& cell = panel.block(role).cells.back()[pos];
            if (is_missing_sentinel(fields[c])) {
                cell = std::nullopt;
                continue;
            }
            std::string tok = trim(fields[c]);
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
                throw PanelError("row " + std::to_string(lineno) + ", column '" + header[c] +
                                 "': cannot parse '" + tok + "' as a number");
            cell = v;
        }
    }

    if (panel.n() == 0) throw PanelError("panel has no DMU rows");
    if (panel.m() == 0) throw PanelError("panel has no input columns");
    if (panel.d() == 0) throw PanelError("panel has no intermediate columns");
    if (panel.s1() + panel.s2() == 0) throw PanelError("panel has no output columns");
    return panel;
}

namespace {

struct ColumnView {
    PanelBlock* block;
    size_t col;
    Cell& cell(size_t row) { return block->cells[row][col]; }
};

void impute_block_mean(PanelBlock& blk, size_t n, const std::string& what) {
    for (size_t c = 0; c < blk.width(); ++c) {
        double sum = 0.0;
        size_t present = 0;
        for (size_t r = 0; r < n; ++r)
            if (blk.cells[r][c]) {
                sum += *blk.cells[r][c];
                ++present;
            }
        if (present == n) continue;
        if (present < 2)
            throw PanelError("column '" + blk.columns[c] + "' (" + what + ") has fewer than 2 present cells");
        double mean = sum / static_cast<double>(present);
        for (size_t r = 0; r < n; ++r)
            if (!blk.cells[r][c]) blk.cells[r][c] = mean;
    }
}

void impute_block_regression(PanelBlock& blk, size_t n, const std::string& predictor,
                             std::vector<std::string>* warnings) {
    // Candidate predictors must be fully present.
    auto fully_present = [&](size_t c) {
        for (size_t r = 0; r < n; ++r)
            if (!blk.cells[r][c]) return false;
        return true;
    };

    for (size_t c = 0; c < blk.width(); ++c) {
        size_t present = 0;
        for (size_t r = 0; r < n; ++r)
            if (blk.cells[r][c]) ++present;
        if (present == n) continue;
        if (present < 2)
            throw PanelError("column '" + blk.columns[c] + "' has fewer than 2 present cells");

        int pred = -1;
        if (!predictor.empty()) {
            for (size_t q = 0; q < blk.width(); ++q)
                if (blk.columns[q] == predictor && q != c && fully_present(q)) pred = static_cast<int>(q);
        } else {
            for (size_t q = 0; q < blk.width(); ++q)
                if (q != c && fully_present(q)) {
                    pred = static_cast<int>(q);
                    break;
                }
        }
        if (pred < 0)
            throw PanelError("no fully present predictor column available for '" + blk.columns[c] + "'");

        // OLS on rows where both are present.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        size_t k = 0;
        for (size_t r = 0; r < n; ++r) {
            if (!blk.cells[r][c]) continue;
            double xv = *blk.cells[r][static_cast<size_t>(pred)];
            double yv = *blk.cells[r][c];
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
            ++k;
        }
        double denom = static_cast<double>(k) * sxx - sx * sx;
        if (std::abs(denom) < 1e-12 * std::max(1.0, sxx)) {
            if (warnings)
                warnings->push_back("degenerate regression for column '" + blk.columns[c] +
                                    "' (zero predictor variance); fell back to column mean");
            double mean = sy / static_cast<double>(k);
            for (size_t r = 0; r < n; ++r)
                if (!blk.cells[r][c]) blk.cells[r][c] = mean;
            continue;
        }
        double slope = (static_cast<double>(k) * sxy - sx * sy) / denom;
        double intercept = (sy - slope * sx) / static_cast<double>(k);
        for (size_t r = 0; r < n; ++r)
            if (!blk.cells[r][c])
                blk.cells[r][c] = intercept + slope * *blk.cells[r][static_cast<size_t>(pred)];
    }
}

} // namespace

DmuPanel impute_missing(const DmuPanel& panel, const ImputeOptions& options,
                        std::vector<std::string>* warnings) {
    DmuPanel out = panel;
    const size_t n = out.n();
    for (auto* b : {&out.inputs, &out.intermediates, &out.desirable, &out.undesirable}) {
        if (options.strategy == Imputer::ColumnMean)
            impute_block_mean(*b, n, "mean imputation");
        else
            impute_block_regression(*b, n, options.predictor, warnings);
    }
    return out;
}

TransformResult range_directional_transform(const DmuPanel& panel, double epsilon_shift) {
    if (!panel.complete())
        throw PanelError("range-directional transform requires a complete panel (impute first)");
    if (!(epsilon_shift > 0.0)) throw PanelError("epsilon_shift must be strictly positive");

    TransformResult out;
    out.panel = panel;
    const size_t n = panel.n();

    auto process = [&](PanelBlock& blk, bool input_like, std::vector<std::vector<double>>& rmat,
                       std::vector<double>& ideal) {
        rmat.assign(n, std::vector<double>(blk.width(), 0.0));
        ideal.assign(blk.width(), 0.0);
        for (size_t c = 0; c < blk.width(); ++c) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (size_t r = 0; r < n; ++r) {
                double v = *blk.cells[r][c];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            ideal[c] = input_like ? lo : hi;
            for (size_t r = 0; r < n; ++r) {
                double v = *blk.cells[r][c];
                rmat[r][c] = input_like ? v - lo : hi - v;
            }
            if (lo <= 0.0) {
                if (hi == lo)
                    throw PanelError("column '" + blk.columns[c] +
                                     "' is constant and non-positive; no meaningful range");
                double shift = epsilon_shift - lo;
                for (size_t r = 0; r < n; ++r)
                    blk.cells[r][c] = *blk.cells[r][c] + shift;
                out.shifted_columns.push_back(blk.columns[c]);
            }
        }
    };

    process(out.panel.inputs, true, out.direction.inputs, out.ideal.inputs);
    process(out.panel.intermediates, false, out.direction.intermediates, out.ideal.intermediates);
    process(out.panel.desirable, false, out.direction.desirable, out.ideal.desirable);
    process(out.panel.undesirable, false, out.direction.undesirable, out.ideal.undesirable);
    return out;
}

PreprocessResult preprocess(const DmuPanel& panel, const ImputeOptions& options,
                            double epsilon_shift) {
    PreprocessResult out;
    DmuPanel imputed = impute_missing(panel, options, &out.warnings);
    TransformResult t = range_directional_transform(imputed, epsilon_shift);
    out.panel = std::move(t.panel);
    out.direction = std::move(t.direction);
    out.ideal = std::move(t.ideal);
    out.shifted_columns = std::move(t.shifted_columns);
    return out;
}

} // namespace netsbm
