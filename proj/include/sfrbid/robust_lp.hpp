#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sfrbid/dynamics.hpp"
#include "sfrbid/linear_expr.hpp"
#include "sfrbid/lp_model.hpp"
#include "sfrbid/market_time.hpp"
#include "sfrbid/policy.hpp"
#include "sfrbid/reference_map.hpp"

namespace sfrbid {

enum class ObjectiveKind { MaxCapacity, ExpectedProfit };

/// Expected prices and activation statistics for the profit objective.
/// Prices are per kWh except `c_res`, which is per kW of capacity for the
/// whole tendering period.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::MaxCapacity;
    double c_res = 0.0;
    VectorXd c_da;    // N_DA
    VectorXd c_id;    // N_ID
    VectorXd c_up;    // N_ID
    VectorXd c_dn;    // N_ID
    VectorXd mu;      // N_S, expected averaged activation
    VectorXd rho_up;  // N_ID, expected up-regulation duty factor
    VectorXd rho_dn;  // N_ID

    /// Fills missing vectors with zeros and checks lengths and ranges.
    void normalize(const IndexCounts& counts, const Averaging& avg);
};

struct BiddingProblem {
    Timescales ts;
    SystemParams system;
    PolicyStructure structure;
    ObjectiveSpec objective;
    double gamma_min = 0.0;  // kW
};

/// Matrices shared by assembly, verification and reporting.
struct ProblemData {
    Timescales ts;
    IndexCounts counts;
    SparseMatrix M;
    SparseMatrix R;
    Averaging avg;
    DiscreteDynamics dyn;

    static ProblemData build(const BiddingProblem& problem);
};

enum class RowFamily : std::uint8_t { Epigraph, Definition, Power, Ramp, StateX, StateY, StateZ };

const char* family_name(RowFamily family);

/// Column layout: masked Q_DA entries, masked Q_ID entries (row-major scan
/// order), q_DA, q_ID, gamma, then auxiliaries (epigraph variables and
/// variables defined by an equality row to keep long expressions short).
struct VariableLayout {
    std::vector<std::pair<std::int64_t, std::int64_t>> qda_entries;
    std::vector<std::pair<std::int64_t, std::int64_t>> qid_entries;
    int qda_begin = 0;
    int qid_begin = 0;
    int qda_vec_begin = 0;
    int qid_vec_begin = 0;
    int gamma = 0;
    int aux_begin = 0;
};

/// p_ref(w~) = Theta w~ + theta with entries that are linear in the policy
/// variables.
struct SymbolicReference {
    std::vector<ExprRow> Theta;      // N_S + 1 rows, columns index w~
    std::vector<LinearExpr> theta;   // N_S + 1
};

/// Worst-case reference slope of one T_S interval, times T_S:
/// upward = abs_sum + nominal, downward = abs_sum - nominal.
struct RampTerm {
    LinearExpr abs_sum;
    LinearExpr nominal;
};

/// var >= |expr|
struct Epigraph {
    int var = -1;
    LinearExpr expr;
};

struct RobustProgram {
    LinearProgram lp;
    VariableLayout layout;
    std::vector<RowFamily> family;      // one per LP row
    std::vector<Epigraph> epigraph;
    std::vector<RampTerm> ramp;         // one per T_S interval
    double ramp_gamma_coef = 0.0;       // 2 T_S / T_C
    double ramp_step_seconds = 0.0;     // T_S

    std::size_t count(RowFamily f) const;
    std::size_t num_aux() const { return lp.num_variables() - static_cast<std::size_t>(layout.aux_begin); }
};

/// Incremental assembly of the robust program. `assemble` runs every step in
/// order; the individual families are exposed for testing.
class ProgramBuilder {
public:
    ProgramBuilder(const BiddingProblem& problem, const ProblemData& data);

    void declare_policy_variables();
    void add_power_constraints();
    void add_ramp_constraints();
    void add_state_constraints();
    void set_objective();

    const SymbolicReference& reference() const { return ref_; }
    RobustProgram take() { return std::move(prog_); }
    RobustProgram& program() { return prog_; }

private:
    /// sum += |expr|, through an epigraph auxiliary unless expr is a multiple of gamma.
    void add_abs(LinearExpr& sum, LinearExpr expr);
    int add_row(const std::string& name, RowFamily fam, const LinearExpr& e, double lo, double hi);
    /// Replaces a long expression by a new variable tied to it by an equality row.
    void shorten(LinearExpr& expr);
    void build_symbolic_reference();

    const BiddingProblem& problem_;
    const ProblemData& data_;
    RobustProgram prog_;
    SymbolicReference ref_;
    std::unordered_map<std::string, int> aux_cache_;
};

RobustProgram assemble(const BiddingProblem& problem, const ProblemData& data);
RobustProgram assemble(const BiddingProblem& problem);

struct SolveOptions {
    SolverOptions lp;
    /// Second stage: keep gamma at its optimum and minimise the worst-case
    /// ramp rate of the target power.
    bool minimize_ramp = false;
    double ramp_gamma_rel_tol = 1e-9;
};

struct Solution {
    LpStatus status = LpStatus::Error;
    AffinePolicy policy;
    double objective = 0.0;
    std::int64_t iterations = 0;
    double seconds = 0.0;
    double max_row_violation = 0.0;
    std::vector<double> x;
    std::string message;
};

AffinePolicy extract_policy(const RobustProgram& prog, const std::vector<double>& x,
                            const IndexCounts& counts);

Solution solve(const RobustProgram& prog, const ProblemData& data, const LpBackend& backend,
               const SolveOptions& options = {});

/// Smallest symmetric ramp capability (kW/s) that keeps the policy feasible:
/// the worst-case reference slope over all intervals plus 2 gamma / T_C.
double required_ramp(const AffinePolicy& policy, const ProblemData& data);

/// Worst-case |p_ref slope| per interval, kW/s, evaluated numerically.
VectorXd worst_case_reference_slopes(const AffinePolicy& policy, const ProblemData& data);

}  // namespace sfrbid
