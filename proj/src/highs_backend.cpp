#include <Highs.h>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sfrbid/lp_model.hpp"

namespace sfrbid {
namespace {

double to_highs(double v) {
    if (v == kInf) return kHighsInf;
    if (v == -kInf) return -kHighsInf;
    return v;
}

HighsLp to_highs_lp(const LinearProgram& lp) {
    HighsLp h;
    h.num_col_ = static_cast<HighsInt>(lp.num_variables());
    h.num_row_ = static_cast<HighsInt>(lp.num_rows());
    h.sense_ = lp.sense == ObjectiveSense::Maximize ? ObjSense::kMaximize : ObjSense::kMinimize;
    h.offset_ = lp.objective_offset;
    h.col_cost_ = lp.objective();
    for (const auto& v : lp.variables()) {
        h.col_lower_.push_back(to_highs(v.lower));
        h.col_upper_.push_back(to_highs(v.upper));
    }
    for (const auto& r : lp.rows()) {
        h.row_lower_.push_back(to_highs(r.lower));
        h.row_upper_.push_back(to_highs(r.upper));
    }
    // Column-wise copy of the row-form matrix.
    auto& a = h.a_matrix_;
    a.format_ = MatrixFormat::kColwise;
    a.num_col_ = h.num_col_;
    a.num_row_ = h.num_row_;
    a.start_.assign(lp.num_variables() + 1, 0);
    for (const auto& r : lp.rows())
        for (const auto& t : r.coefs) ++a.start_[static_cast<std::size_t>(t.var) + 1];
    for (std::size_t j = 0; j < lp.num_variables(); ++j) a.start_[j + 1] += a.start_[j];
    a.index_.resize(static_cast<std::size_t>(a.start_.back()));
    a.value_.resize(a.index_.size());
    std::vector<HighsInt> fill(a.start_.begin(), a.start_.end() - 1);
    for (std::size_t i = 0; i < lp.rows().size(); ++i)
        for (const auto& t : lp.rows()[i].coefs) {
            const auto pos = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.var)]++);
            a.index_[pos] = static_cast<HighsInt>(i);
            a.value_[pos] = t.coef;
        }
    return h;
}

class HighsBackend final : public LpBackend {
public:
    std::string name() const override { return "highs"; }

    LpResult solve(const LinearProgram& lp, const SolverOptions& options) const override {
        const auto start = std::chrono::steady_clock::now();
        LpResult result;
        Highs highs;
        highs.setOptionValue("output_flag", options.verbose);
        highs.setOptionValue("primal_feasibility_tolerance", options.feasibility_tol);
        highs.setOptionValue("dual_feasibility_tolerance", options.optimality_tol);
        highs.setOptionValue("solver", options.method);
        if (std::isfinite(options.time_limit)) highs.setOptionValue("time_limit", options.time_limit);
        if (options.deterministic) {
            highs.setOptionValue("threads", 1);
            highs.setOptionValue("random_seed", 0);
        }

        if (highs.passModel(to_highs_lp(lp)) == HighsStatus::kError) {
            result.message = "HiGHS rejected the model";
            return result;
        }
        HighsStatus run_status = highs.run();
        HighsModelStatus ms = highs.getModelStatus();
        if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
            // Presolve cannot tell the two apart; the plain simplex can.
            highs.setOptionValue("presolve", "off");
            highs.setOptionValue("solver", "simplex");
            highs.clearSolver();
            run_status = highs.run();
            ms = highs.getModelStatus();
        }

        const auto& info = highs.getInfo();
        result.iterations = static_cast<std::int64_t>(info.simplex_iteration_count) +
                            info.ipm_iteration_count + info.crossover_iteration_count;
        result.message = highs.modelStatusToString(ms);

        switch (ms) {
        case HighsModelStatus::kOptimal: {
            result.status = LpStatus::Optimal;
            const auto& sol = highs.getSolution();
            result.x = sol.col_value;
            if (sol.dual_valid) result.row_duals = sol.row_dual;
            result.objective = info.objective_function_value;
            break;
        }
        case HighsModelStatus::kInfeasible: result.status = LpStatus::Infeasible; break;
        case HighsModelStatus::kUnbounded:
        case HighsModelStatus::kUnboundedOrInfeasible: result.status = LpStatus::Unbounded; break;
        default:
            result.status = LpStatus::Error;
            if (run_status == HighsStatus::kError) result.message += " (run failed)";
            break;
        }
        result.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }
};

}  // namespace

std::unique_ptr<LpBackend> make_backend(const std::string& id) {
    if (id == "highs") return std::make_unique<HighsBackend>();
    throw std::invalid_argument("unknown LP backend '" + id + "' (available: highs)");
}

}  // namespace sfrbid
