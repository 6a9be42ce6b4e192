#include "sfrbid/lp_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace sfrbid {

int LinearProgram::add_variable(std::string name, double lower, double upper, double objective) {
    vars_.push_back({std::move(name), lower, upper});
    objective_.push_back(objective);
    return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_row(std::string name, const LinearExpr& expr, double lower, double upper) {
    for (const auto& t : expr.terms())
        if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
            throw std::out_of_range("row '" + name + "' references an undeclared variable");
    const double shift = expr.constant();
    rows_.push_back({std::move(name), expr.terms(), lower - shift, upper - shift});
    return static_cast<int>(rows_.size()) - 1;
}

std::size_t LinearProgram::num_nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.coefs.size();
    return n;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
        worst = std::max(worst, vars_[j].lower - x[j]);
        worst = std::max(worst, x[j] - vars_[j].upper);
    }
    for (const auto& r : rows_) {
        double v = 0.0;
        for (const auto& t : r.coefs) v += t.coef * x[static_cast<std::size_t>(t.var)];
        worst = std::max(worst, r.lower - v);
        worst = std::max(worst, v - r.upper);
    }
    return worst;
}

double LinearProgram::objective_value(const std::vector<double>& x) const {
    double v = objective_offset;
    for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
    return v;
}

const char* status_name(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Error: return "error";
    }
    return "?";
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

void field_line(std::ostream& out, const std::string& a, const std::string& b,
                const std::string& value) {
    out << "    " << a << "  " << b << "  " << value << '\n';
}

}  // namespace

void write_mps(const LinearProgram& lp, std::ostream& out) {
    out << "NAME          " << lp.name << '\n';
    if (lp.sense == ObjectiveSense::Maximize) out << "OBJSENSE\n    MAX\n";
    out << "ROWS\n";
    out << " N  obj\n";
    const auto& rows = lp.rows();
    std::vector<char> type(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const bool lo = std::isfinite(r.lower);
        const bool hi = std::isfinite(r.upper);
        if (lo && hi && r.lower == r.upper) type[i] = 'E';
        else if (hi) type[i] = 'L';
        else if (lo) type[i] = 'G';
        else type[i] = 'N';
        out << ' ' << type[i] << "  " << r.name << '\n';
    }

    // Transpose rows into columns, keeping row order inside each column.
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(lp.num_variables());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& t : rows[i].coefs) cols[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);

    out << "COLUMNS\n";
    const auto& vars = lp.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (lp.objective()[j] != 0.0) field_line(out, vars[j].name, "obj", num(lp.objective()[j]));
        for (const auto& [i, v] : cols[j]) field_line(out, vars[j].name, rows[i].name, num(v));
        if (lp.objective()[j] == 0.0 && cols[j].empty()) field_line(out, vars[j].name, "obj", "0");
    }

    out << "RHS\n";
    if (lp.objective_offset != 0.0) field_line(out, "rhs", "obj", num(-lp.objective_offset));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        double rhs = 0.0;
        if (type[i] == 'L' || type[i] == 'E') rhs = r.upper;
        else if (type[i] == 'G') rhs = r.lower;
        if (rhs != 0.0) field_line(out, "rhs", r.name, num(rhs));
    }

    bool ranges_header = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (type[i] == 'L' && std::isfinite(r.lower)) {
            if (!ranges_header) out << "RANGES\n", ranges_header = true;
            field_line(out, "rng", r.name, num(r.upper - r.lower));
        }
    }

    bool bounds_header = false;
    auto bound = [&](const char* kind, const std::string& var, const std::string* value) {
        if (!bounds_header) out << "BOUNDS\n", bounds_header = true;
        out << ' ' << kind << " bnd  " << var;
        if (value) out << "  " << *value;
        out << '\n';
    };
    for (const auto& v : vars) {
        const bool lo = std::isfinite(v.lower);
        const bool hi = std::isfinite(v.upper);
        if (lo && hi && v.lower == v.upper) {
            const auto s = num(v.lower);
            bound("FX", v.name, &s);
            continue;
        }
        if (!lo && !hi) {
            bound("FR", v.name, nullptr);
            continue;
        }
        if (!lo) bound("MI", v.name, nullptr);
        else if (v.lower != 0.0) {
            const auto s = num(v.lower);
            bound("LO", v.name, &s);
        }
        if (hi) {
            const auto s = num(v.upper);
            bound("UP", v.name, &s);
        }
    }
    out << "ENDATA\n";
}

void write_mps_file(const LinearProgram& lp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_mps(lp, out);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace sfrbid
