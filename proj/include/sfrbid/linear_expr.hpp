#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sfrbid {

/// One coefficient of a linear expression over LP variables.
struct Term {
    int var = -1;
    double coef = 0.0;

    bool operator==(const Term&) const = default;
};

/// Sparse affine expression sum_j coef_j x_j + constant. Terms stay sorted
/// by variable index with no duplicates and no zero coefficients.
class LinearExpr {
public:
    LinearExpr() = default;
    explicit LinearExpr(double constant) : constant_(constant) {}

    static LinearExpr variable(int var, double coef = 1.0);

    const std::vector<Term>& terms() const { return terms_; }
    double constant() const { return constant_; }
    bool is_constant() const { return terms_.empty(); }
    bool empty() const { return terms_.empty() && constant_ == 0.0; }

    void add_term(int var, double coef);
    void add_constant(double c) { constant_ += c; }
    /// this += scale * other
    void add(const LinearExpr& other, double scale = 1.0);
    LinearExpr scaled(double scale) const;

    /// Drops terms with |coef| <= tol.
    void prune(double tol);

    double evaluate(const std::vector<double>& x) const;

    bool operator==(const LinearExpr&) const = default;

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

/// Row of expressions indexed by an integer column (sorted, sparse), e.g. one
/// row of the affine map from averaged activation to power breakpoints.
class ExprRow {
public:
    struct Entry {
        std::int64_t col;
        LinearExpr expr;
    };

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    /// this += scale * other
    void add(const ExprRow& other, double scale);
    void add_at(std::int64_t col, const LinearExpr& expr, double scale = 1.0);
    ExprRow scaled(double scale) const;
    const LinearExpr* find(std::int64_t col) const;
    void prune(double tol);

private:
    std::vector<Entry> entries_;
};

}  // namespace sfrbid
