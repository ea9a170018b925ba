#include "netsbm/conic.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace netsbm {

int ConicProgram::add_variable(std::string name, bool nonneg) {
    vars_.push_back({std::move(name), nonneg});
    return static_cast<int>(vars_.size()) - 1;
}

void ConicProgram::set_objective(Sense sense, LinearExpr expr) {
    sense_ = sense;
    objective_ = std::move(expr);
}

int ConicProgram::add_constraint(LinearExpr expr, Relation rel, double rhs, std::string label) {
    rows_.push_back({std::move(expr), rel, rhs, std::move(label)});
    return static_cast<int>(rows_.size()) - 1;
}

int ConicProgram::add_soc(std::vector<LinearExpr> u, LinearExpr t, std::string label) {
    cones_.push_back({std::move(u), std::move(t), std::move(label)});
    return static_cast<int>(cones_.size()) - 1;
}

int ConicProgram::variable_index(const std::string& name) const {
    for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

void check_expr(const LinearExpr& expr, int nvars, const std::string& where, int row_index,
                std::vector<Defect>& out) {
    for (const auto& term : expr.terms) {
        if (term.var < 0 || term.var >= nvars) {
            out.push_back({where + " references undeclared variable #" + std::to_string(term.var),
                           row_index, term.var});
        }
        if (!std::isfinite(term.coeff)) {
            out.push_back({where + " has non-finite coefficient", row_index,
                           (term.var >= 0 && term.var < nvars) ? term.var : -1});
        }
    }
    if (!std::isfinite(expr.constant))
        out.push_back({where + " has non-finite constant", row_index, -1});
}

} // namespace

std::vector<Defect> validate(const ConicProgram& program) {
    std::vector<Defect> defects;
    const int n = program.num_variables();

    std::unordered_map<std::string, int> seen;
    for (int i = 0; i < n; ++i) {
        const auto& name = program.variable(i).name;
        auto [it, inserted] = seen.emplace(name, i);
        if (!inserted)
            defects.push_back({"duplicate variable name \"" + name + "\"", -1, i});
    }

    check_expr(program.objective(), n, "objective", -1, defects);

    const auto& rows = program.linear_constraints();
    for (size_t r = 0; r < rows.size(); ++r) {
        check_expr(rows[r].expr, n, "constraint " + std::to_string(r), static_cast<int>(r), defects);
        if (!std::isfinite(rows[r].rhs))
            defects.push_back({"constraint " + std::to_string(r) + " has non-finite rhs",
                               static_cast<int>(r), -1});
    }

    const auto& cones = program.soc_constraints();
    for (size_t c = 0; c < cones.size(); ++c) {
        const std::string where = "cone " + std::to_string(c);
        if (cones[c].u.empty())
            defects.push_back({where + " has empty norm vector", static_cast<int>(c), -1});
        for (const auto& member : cones[c].u)
            check_expr(member, n, where, static_cast<int>(c), defects);
        check_expr(cones[c].t, n, where, static_cast<int>(c), defects);
    }
    return defects;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void dump_expr(std::ostringstream& os, const LinearExpr& e) {
    for (const auto& t : e.terms) os << ' ' << t.var << ':' << fmt_double(t.coeff);
    if (e.constant != 0.0) os << " const " << fmt_double(e.constant);
}

const char* rel_token(Relation r) {
    switch (r) {
        case Relation::LessEqual: return "<=";
        case Relation::Equal: return "==";
        case Relation::GreaterEqual: return ">=";
    }
    return "?";
}

Relation parse_rel(const std::string& tok) {
    if (tok == "<=") return Relation::LessEqual;
    if (tok == "==") return Relation::Equal;
    if (tok == ">=") return Relation::GreaterEqual;
    throw std::runtime_error("bad relation token '" + tok + "' in program dump");
}

LinearExpr parse_expr_tokens(std::istringstream& is) {
    LinearExpr e;
    std::string tok;
    while (is >> tok) {
        if (tok == "const") {
            if (!(is >> tok)) throw std::runtime_error("dangling const in program dump");
            e.constant = std::stod(tok);
            continue;
        }
        if (tok == "|") break; // member separator inside cone lines
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("bad term token '" + tok + "' in program dump");
        e.add(std::stoi(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    }
    return e;
}

} // namespace

std::string dump(const ConicProgram& p) {
    std::ostringstream os;
    os << "conic-program v1\n";
    os << (p.sense() == Sense::Maximize ? "maximize" : "minimize");
    dump_expr(os, p.objective());
    os << '\n';
    for (const auto& v : p.variables())
        os << "var " << (v.nonneg ? "nonneg " : "free ") << v.name << '\n';
    for (const auto& row : p.linear_constraints()) {
        os << "row " << rel_token(row.rel) << ' ' << fmt_double(row.rhs) << " [" << row.label
           << "]";
        dump_expr(os, row.expr);
        os << '\n';
    }
    for (const auto& cone : p.soc_constraints()) {
        os << "cone " << cone.u.size() << " [" << cone.label << "] t";
        dump_expr(os, cone.t);
        for (const auto& member : cone.u) {
            os << " |";
            dump_expr(os, member);
        }
        os << '\n';
    }
    return os.str();
}

ConicProgram parse_dump(const std::string& text) {
    ConicProgram p;
    std::istringstream lines(text);
    std::string line;
    if (!std::getline(lines, line) || line != "conic-program v1")
        throw std::runtime_error("not a conic program dump");

    Sense sense = Sense::Maximize;
    LinearExpr objective;
    bool have_objective = false;

    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string head;
        is >> head;
        if (head == "maximize" || head == "minimize") {
            sense = head == "maximize" ? Sense::Maximize : Sense::Minimize;
            objective = parse_expr_tokens(is);
            have_objective = true;
        } else if (head == "var") {
            std::string kind, name;
            is >> kind >> name;
            p.add_variable(name, kind == "nonneg");
        } else if (head == "row") {
            std::string rel, rhs, label;
            is >> rel >> rhs;
            std::getline(is, label, ']');
            auto bracket = label.find('[');
            label = bracket == std::string::npos ? "" : label.substr(bracket + 1);
            p.add_constraint(parse_expr_tokens(is), parse_rel(rel), std::stod(rhs), label);
        } else if (head == "cone") {
            size_t nmembers = 0;
            std::string label, tword;
            is >> nmembers;
            std::getline(is, label, ']');
            auto bracket = label.find('[');
            label = bracket == std::string::npos ? "" : label.substr(bracket + 1);
            is >> tword;
            if (tword != "t") throw std::runtime_error("malformed cone line in program dump");
            LinearExpr t = parse_expr_tokens(is);
            std::vector<LinearExpr> u;
            while (u.size() < nmembers && is) u.push_back(parse_expr_tokens(is));
            if (u.size() != nmembers) throw std::runtime_error("cone member count mismatch");
            p.add_soc(std::move(u), std::move(t), label);
        } else {
            throw std::runtime_error("unknown directive '" + head + "' in program dump");
        }
    }
    if (!have_objective) throw std::runtime_error("program dump lacks an objective");
    p.set_objective(sense, std::move(objective));
    return p;
}

namespace {

bool expr_equal(const LinearExpr& a, const LinearExpr& b) {
    if (a.constant != b.constant || a.terms.size() != b.terms.size()) return false;
    for (size_t i = 0; i < a.terms.size(); ++i)
        if (a.terms[i].var != b.terms[i].var || a.terms[i].coeff != b.terms[i].coeff) return false;
    return true;
}

} // namespace

bool structurally_equal(const ConicProgram& a, const ConicProgram& b) {
    if (a.sense() != b.sense() || !expr_equal(a.objective(), b.objective())) return false;
    if (a.num_variables() != b.num_variables()) return false;
    for (int i = 0; i < a.num_variables(); ++i)
        if (a.variable(i).name != b.variable(i).name || a.variable(i).nonneg != b.variable(i).nonneg)
            return false;
    const auto& ra = a.linear_constraints();
    const auto& rb = b.linear_constraints();
    if (ra.size() != rb.size()) return false;
    for (size_t i = 0; i < ra.size(); ++i)
        if (ra[i].rel != rb[i].rel || ra[i].rhs != rb[i].rhs || ra[i].label != rb[i].label ||
            !expr_equal(ra[i].expr, rb[i].expr))
            return false;
    const auto& ca = a.soc_constraints();
    const auto& cb = b.soc_constraints();
    if (ca.size() != cb.size()) return false;
    for (size_t i = 0; i < ca.size(); ++i) {
        if (ca[i].label != cb[i].label || ca[i].u.size() != cb[i].u.size() ||
            !expr_equal(ca[i].t, cb[i].t))
            return false;
        for (size_t m = 0; m < ca[i].u.size(); ++m)
            if (!expr_equal(ca[i].u[m], cb[i].u[m])) return false;
    }
    return true;
}

} // namespace netsbm
