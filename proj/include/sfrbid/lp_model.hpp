#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sfrbid/linear_expr.hpp"

namespace sfrbid {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ObjectiveSense { Minimize, Maximize };

struct LpVariable {
    std::string name;
    double lower = -kInf;
    double upper = kInf;
};

/// lower <= sum coef_j x_j <= upper
struct LpRow {
    std::string name;
    std::vector<Term> coefs;
    double lower = -kInf;
    double upper = kInf;
};

/// Sparse linear program in row form: objective, two-sided rows, column bounds.
class LinearProgram {
public:
    int add_variable(std::string name, double lower = -kInf, double upper = kInf,
                     double objective = 0.0);
    /// Adds lower <= expr <= upper; the expression's constant moves to the bounds.
    int add_row(std::string name, const LinearExpr& expr, double lower, double upper);

    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_nonzeros() const;

    const std::vector<LpVariable>& variables() const { return vars_; }
    std::vector<LpVariable>& variables() { return vars_; }
    const std::vector<LpRow>& rows() const { return rows_; }
    const std::vector<double>& objective() const { return objective_; }
    std::vector<double>& objective() { return objective_; }

    ObjectiveSense sense = ObjectiveSense::Minimize;
    double objective_offset = 0.0;
    std::string name = "sfrbid";

    /// Largest bound or row violation of a primal point.
    double max_violation(const std::vector<double>& x) const;
    double objective_value(const std::vector<double>& x) const;

private:
    std::vector<LpVariable> vars_;
    std::vector<LpRow> rows_;
    std::vector<double> objective_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Error };

const char* status_name(LpStatus status);

struct LpResult {
    LpStatus status = LpStatus::Error;
    std::vector<double> x;
    std::vector<double> row_duals;  // empty when the backend does not report them
    double objective = 0.0;
    std::int64_t iterations = 0;
    double seconds = 0.0;
    std::string message;
};

struct SolverOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    bool deterministic = true;
    bool verbose = false;
    double time_limit = kInf;
    std::string method = "choose";  // choose | simplex | ipm
};

/// Anything that can solve a sparse LP.
class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual std::string name() const = 0;
    virtual LpResult solve(const LinearProgram& lp, const SolverOptions& options) const = 0;
};

/// Known ids: "highs". Throws std::invalid_argument for unknown ids.
std::unique_ptr<LpBackend> make_backend(const std::string& id);

/// Free-format MPS with 12 significant digits. Output depends only on `lp`.
void write_mps(const LinearProgram& lp, std::ostream& out);
void write_mps_file(const LinearProgram& lp, const std::string& path);

}  // namespace sfrbid
