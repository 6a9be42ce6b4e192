#include "sfrbid/linear_expr.hpp"

#include <algorithm>
#include <cmath>

namespace sfrbid {

LinearExpr LinearExpr::variable(int var, double coef) {
    LinearExpr e;
    e.add_term(var, coef);
    return e;
}

void LinearExpr::add_term(int var, double coef) {
    if (coef == 0.0) return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                               [](const Term& t, int v) { return t.var < v; });
    if (it != terms_.end() && it->var == var) {
        it->coef += coef;
        if (it->coef == 0.0) terms_.erase(it);
    } else {
        terms_.insert(it, Term{var, coef});
    }
}

void LinearExpr::add(const LinearExpr& other, double scale) {
    constant_ += scale * other.constant_;
    if (scale == 0.0 || other.terms_.empty()) return;
    std::vector<Term> merged;
    merged.reserve(terms_.size() + other.terms_.size());
    auto a = terms_.begin();
    auto b = other.terms_.begin();
    while (a != terms_.end() || b != other.terms_.end()) {
        if (b == other.terms_.end() || (a != terms_.end() && a->var < b->var)) {
            merged.push_back(*a++);
        } else if (a == terms_.end() || b->var < a->var) {
            merged.push_back(Term{b->var, scale * b->coef});
            ++b;
        } else {
            const double c = a->coef + scale * b->coef;
            if (c != 0.0) merged.push_back(Term{a->var, c});
            ++a;
            ++b;
        }
    }
    terms_ = std::move(merged);
}

LinearExpr LinearExpr::scaled(double scale) const {
    LinearExpr e;
    e.add(*this, scale);
    return e;
}

void LinearExpr::prune(double tol) {
    std::erase_if(terms_, [tol](const Term& t) { return std::abs(t.coef) <= tol; });
}

double LinearExpr::evaluate(const std::vector<double>& x) const {
    double v = constant_;
    for (const auto& t : terms_) v += t.coef * x[static_cast<std::size_t>(t.var)];
    return v;
}

void ExprRow::add(const ExprRow& other, double scale) {
    if (scale == 0.0 || other.entries_.empty()) return;
    std::vector<Entry> merged;
    merged.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
        if (b == other.entries_.end() || (a != entries_.end() && a->col < b->col)) {
            merged.push_back(std::move(*a++));
        } else if (a == entries_.end() || b->col < a->col) {
            merged.push_back(Entry{b->col, b->expr.scaled(scale)});
            ++b;
        } else {
            a->expr.add(b->expr, scale);
            if (!a->expr.empty()) merged.push_back(std::move(*a));
            ++a;
            ++b;
        }
    }
    entries_ = std::move(merged);
}

void ExprRow::add_at(std::int64_t col, const LinearExpr& expr, double scale) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), col,
                               [](const Entry& e, std::int64_t c) { return e.col < c; });
    if (it != entries_.end() && it->col == col) {
        it->expr.add(expr, scale);
        if (it->expr.empty()) entries_.erase(it);
    } else {
        auto e = expr.scaled(scale);
        if (!e.empty()) entries_.insert(it, Entry{col, std::move(e)});
    }
}

ExprRow ExprRow::scaled(double scale) const {
    ExprRow r;
    r.add(*this, scale);
    return r;
}

const LinearExpr* ExprRow::find(std::int64_t col) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), col,
                               [](const Entry& e, std::int64_t c) { return e.col < c; });
    return (it != entries_.end() && it->col == col) ? &it->expr : nullptr;
}

void ExprRow::prune(double tol) {
    for (auto& e : entries_) e.expr.prune(tol);
    std::erase_if(entries_, [](const Entry& e) { return e.expr.empty(); });
}

}  // namespace sfrbid
