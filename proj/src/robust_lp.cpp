#include "sfrbid/robust_lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sfrbid {
namespace {

constexpr double kPruneTol = 1e-13;
constexpr std::size_t kMaxInlineTerms = 6;

std::string tag(const char* prefix, std::int64_t i) { return prefix + std::to_string(i); }

std::string tag(const char* prefix, std::int64_t i, std::int64_t j) {
    return prefix + std::to_string(i) + "_" + std::to_string(j);
}

void check_length(const VectorXd& v, std::int64_t n, const char* what) {
    if (v.size() != n)
        throw std::invalid_argument(std::string(what) + " has length " + std::to_string(v.size()) +
                                    ", expected " + std::to_string(n));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) throw std::invalid_argument(std::string(what) + " is not finite");
}

void fill_zero(VectorXd& v, std::int64_t n) {
    if (v.size() == 0) v = VectorXd::Zero(n);
}

/// Byte key of an expression, used to share epigraph variables.
std::string expr_key(const LinearExpr& e) {
    std::string key;
    key.resize(sizeof(double) + e.terms().size() * (sizeof(int) + sizeof(double)));
    char* p = key.data();
    const double c = e.constant();
    std::memcpy(p, &c, sizeof c);
    p += sizeof c;
    for (const auto& t : e.terms()) {
        std::memcpy(p, &t.var, sizeof t.var);
        p += sizeof t.var;
        std::memcpy(p, &t.coef, sizeof t.coef);
        p += sizeof t.coef;
    }
    return key;
}

double bound_at_breakpoint(const VectorXd& v, std::int64_t s, std::int64_t n, bool upper) {
    if (s == 0) return v[0];
    if (s == n) return v[n - 1];
    return upper ? std::min(v[s - 1], v[s]) : std::max(v[s - 1], v[s]);
}

}  // namespace

void ObjectiveSpec::normalize(const IndexCounts& counts, const Averaging& avg) {
    const bool have_mu = mu.size() != 0;
    const bool have_rho = rho_up.size() != 0 || rho_dn.size() != 0;
    fill_zero(c_da, counts.n_da);
    fill_zero(c_id, counts.n_id);
    fill_zero(c_up, counts.n_id);
    fill_zero(c_dn, counts.n_id);
    fill_zero(rho_up, counts.n_id);
    fill_zero(rho_dn, counts.n_id);
    check_length(c_da, counts.n_da, "c_DA");
    check_length(c_id, counts.n_id, "c_ID");
    check_length(c_up, counts.n_id, "c_up");
    check_length(c_dn, counts.n_id, "c_dn");
    check_length(rho_up, counts.n_id, "rho_up");
    check_length(rho_dn, counts.n_id, "rho_dn");
    if (!std::isfinite(c_res)) throw std::invalid_argument("c_RES is not finite");
    for (std::int64_t k = 0; k < counts.n_id; ++k) {
        if (rho_up[k] < 0.0 || rho_dn[k] < 0.0 || rho_up[k] + rho_dn[k] > 1.0 + 1e-12)
            throw std::invalid_argument("duty factors at slot " + std::to_string(k + 1) +
                                        " must be non-negative with rho_up + rho_dn <= 1");
    }
    if (!have_mu) {
        // Constant expected activation inside each intra-day slot.
        mu = VectorXd::Zero(counts.n_s);
        const std::int64_t per = counts.n_s / counts.n_id;
        for (std::int64_t s = 0; s < counts.n_s; ++s) mu[s] = rho_up[s / per] - rho_dn[s / per];
    }
    check_length(mu, counts.n_s, "mu");
    if (mu.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw std::invalid_argument("mu must lie in [-1, 1]");
    if (have_mu && have_rho) {
        const VectorXd net = avg.A_id * mu;
        const double gap = (net - (rho_up - rho_dn)).cwiseAbs().maxCoeff();
        if (gap > 1e-6)
            throw std::invalid_argument("mu averaged per intra-day slot differs from rho_up - rho_dn by " +
                                        std::to_string(gap));
    }
}

ProblemData ProblemData::build(const BiddingProblem& problem) {
    ProblemData d;
    d.ts = problem.ts;
    d.counts = derive_counts(problem.ts);
    problem.system.validate(d.counts.n_s);
    d.M = build_M(d.counts, d.ts);
    d.R = build_R(d.ts, d.counts);
    d.avg = build_averaging(d.counts, d.ts);
    d.dyn = make_dynamics(problem.system, d.ts);
    return d;
}

const char* family_name(RowFamily family) {
    switch (family) {
    case RowFamily::Epigraph: return "epigraph";
    case RowFamily::Definition: return "definition";
    case RowFamily::Power: return "power";
    case RowFamily::Ramp: return "ramp";
    case RowFamily::StateX: return "state_x";
    case RowFamily::StateY: return "state_y";
    case RowFamily::StateZ: return "state_z";
    }
    return "?";
}

std::size_t RobustProgram::count(RowFamily f) const {
    return static_cast<std::size_t>(std::count(family.begin(), family.end(), f));
}

ProgramBuilder::ProgramBuilder(const BiddingProblem& problem, const ProblemData& data)
    : problem_(problem), data_(data) {
    const auto& c = data.counts;
    const auto& st = problem.structure;
    if (st.mask_da.rows() != c.n_da || st.mask_da.cols() != c.n_da || st.mask_id.rows() != c.n_id ||
        st.mask_id.cols() != c.n_id)
        throw std::invalid_argument("policy masks do not match the horizon");
    if (!(problem.gamma_min >= 0.0) || !std::isfinite(problem.gamma_min))
        throw std::invalid_argument("gamma_min must be a finite non-negative number");
    if (problem.ts.ramp == 0)
        throw std::invalid_argument(
            "the robust program needs T_RP > 0; a step reference has unbounded ramp rates");
}

int ProgramBuilder::add_row(const std::string& name, RowFamily fam, const LinearExpr& e, double lo,
                            double hi) {
    const int r = prog_.lp.add_row(name, e, lo, hi);
    prog_.family.push_back(fam);
    return r;
}

void ProgramBuilder::add_abs(LinearExpr& sum, LinearExpr expr) {
    expr.prune(kPruneTol);
    const int gamma = prog_.layout.gamma;
    if (expr.is_constant()) {
        sum.add_constant(std::abs(expr.constant()));
        return;
    }
    if (expr.constant() == 0.0 && expr.terms().size() == 1 && expr.terms()[0].var == gamma) {
        sum.add_term(gamma, std::abs(expr.terms()[0].coef));
        return;
    }
    if (expr.terms()[0].coef < 0.0) expr = expr.scaled(-1.0);
    auto key = expr_key(expr);
    auto it = aux_cache_.find(key);
    int var;
    if (it != aux_cache_.end()) {
        var = it->second;
    } else {
        const auto n = static_cast<std::int64_t>(prog_.epigraph.size());
        var = prog_.lp.add_variable(tag("lam", n), 0.0, kInf);
        LinearExpr up = LinearExpr::variable(var);
        up.add(expr, -1.0);
        LinearExpr dn = LinearExpr::variable(var);
        dn.add(expr, 1.0);
        add_row(tag("ep_p", n), RowFamily::Epigraph, up, 0.0, kInf);
        add_row(tag("ep_m", n), RowFamily::Epigraph, dn, 0.0, kInf);
        prog_.epigraph.push_back({var, expr});
        aux_cache_.emplace(std::move(key), var);
    }
    sum.add_term(var, 1.0);
}

void ProgramBuilder::shorten(LinearExpr& expr) {
    if (expr.terms().size() <= kMaxInlineTerms) return;
    const auto n = static_cast<std::int64_t>(prog_.lp.num_variables());
    const int var = prog_.lp.add_variable(tag("def", n));
    LinearExpr row = LinearExpr::variable(var);
    LinearExpr body = expr;
    const double constant = body.constant();
    body.add_constant(-constant);
    row.add(body, -1.0);
    add_row(tag("def", n), RowFamily::Definition, row, 0.0, 0.0);
    expr = LinearExpr::variable(var);
    expr.add_constant(constant);
}

void ProgramBuilder::declare_policy_variables() {
    auto& lay = prog_.layout;
    auto& lp = prog_.lp;
    const auto& c = data_.counts;
    lay.qda_entries = problem_.structure.mask_da.entries();
    lay.qid_entries = problem_.structure.mask_id.entries();
    lay.qda_begin = static_cast<int>(lp.num_variables());
    for (const auto& [j, m] : lay.qda_entries) lp.add_variable(tag("Qda", j + 1, m + 1));
    lay.qid_begin = static_cast<int>(lp.num_variables());
    for (const auto& [k, m] : lay.qid_entries) lp.add_variable(tag("Qid", k + 1, m + 1));
    lay.qda_vec_begin = static_cast<int>(lp.num_variables());
    for (std::int64_t j = 0; j < c.n_da; ++j) lp.add_variable(tag("qda", j + 1));
    lay.qid_vec_begin = static_cast<int>(lp.num_variables());
    for (std::int64_t k = 0; k < c.n_id; ++k) lp.add_variable(tag("qid", k + 1));
    lay.gamma = lp.add_variable("gamma", problem_.gamma_min, kInf);
    lay.aux_begin = static_cast<int>(lp.num_variables());
    build_symbolic_reference();
}

void ProgramBuilder::build_symbolic_reference() {
    const auto& c = data_.counts;
    const auto& lay = prog_.layout;
    const auto& M = data_.M;
    const auto& A_da = data_.avg.A_da;
    const auto& A_id = data_.avg.A_id;

    // Symbolic e_base = (M Q_DA A_DA + Q_ID A_ID) w~ + M q_DA + q_ID.
    std::vector<ExprRow> B(static_cast<std::size_t>(c.n_id));
    std::vector<LinearExpr> b(static_cast<std::size_t>(c.n_id));

    // Columns of M: day-ahead slot j feeds the intra-day slots listed here.
    const SparseMatrix Mt = M.transpose();
    for (std::size_t v = 0; v < lay.qda_entries.size(); ++v) {
        const auto [j, m] = lay.qda_entries[v];
        const int var = lay.qda_begin + static_cast<int>(v);
        for (SparseMatrix::InnerIterator mk(Mt, j); mk; ++mk)
            for (SparseMatrix::InnerIterator ai(A_da, m); ai; ++ai)
                B[static_cast<std::size_t>(mk.col())].add_at(ai.col(), LinearExpr::variable(var),
                                                             mk.value() * ai.value());
    }
    for (std::size_t v = 0; v < lay.qid_entries.size(); ++v) {
        const auto [k, m] = lay.qid_entries[v];
        const int var = lay.qid_begin + static_cast<int>(v);
        for (SparseMatrix::InnerIterator ai(A_id, m); ai; ++ai)
            B[static_cast<std::size_t>(k)].add_at(ai.col(), LinearExpr::variable(var), ai.value());
    }
    for (std::int64_t j = 0; j < c.n_da; ++j)
        for (SparseMatrix::InnerIterator mk(Mt, j); mk; ++mk)
            b[static_cast<std::size_t>(mk.col())].add_term(lay.qda_vec_begin + static_cast<int>(j),
                                                           mk.value());
    for (std::int64_t k = 0; k < c.n_id; ++k)
        b[static_cast<std::size_t>(k)].add_term(lay.qid_vec_begin + static_cast<int>(k), 1.0);

    const auto& R = data_.R;
    ref_.Theta.assign(static_cast<std::size_t>(c.n_s + 1), ExprRow{});
    ref_.theta.assign(static_cast<std::size_t>(c.n_s + 1), LinearExpr{});
    for (std::int64_t s = 0; s <= c.n_s; ++s) {
        auto& row = ref_.Theta[static_cast<std::size_t>(s)];
        auto& nom = ref_.theta[static_cast<std::size_t>(s)];
        for (SparseMatrix::InnerIterator rk(R, s); rk; ++rk) {
            row.add(B[static_cast<std::size_t>(rk.col())], rk.value());
            nom.add(b[static_cast<std::size_t>(rk.col())], rk.value());
        }
        row.prune(kPruneTol);
        nom.prune(kPruneTol);
    }
}

void ProgramBuilder::add_power_constraints() {
    const auto n = data_.counts.n_s;
    const auto& sys = problem_.system;
    const int gamma = prog_.layout.gamma;
    for (std::int64_t s = 0; s <= n; ++s) {
        LinearExpr abs_sum;
        for (const auto& e : ref_.Theta[static_cast<std::size_t>(s)].entries()) add_abs(abs_sum, e.expr);
        abs_sum.add_term(gamma, 1.0);
        const auto& nom = ref_.theta[static_cast<std::size_t>(s)];

        LinearExpr hi = nom;
        hi.add(abs_sum);
        add_row(tag("pw_hi", s), RowFamily::Power, hi, -kInf, bound_at_breakpoint(sys.p_hi, s, n, true));
        LinearExpr lo = nom;
        lo.add(abs_sum, -1.0);
        add_row(tag("pw_lo", s), RowFamily::Power, lo, bound_at_breakpoint(sys.p_lo, s, n, false), kInf);
    }
}

void ProgramBuilder::add_ramp_constraints() {
    const auto n = data_.counts.n_s;
    const auto& sys = problem_.system;
    const int gamma = prog_.layout.gamma;
    const double step_s = static_cast<double>(data_.ts.system);
    prog_.ramp_step_seconds = step_s;
    prog_.ramp_gamma_coef = 2.0 * step_s / static_cast<double>(data_.ts.control);
    prog_.ramp.assign(static_cast<std::size_t>(n), RampTerm{});
    for (std::int64_t s = 1; s <= n; ++s) {
        ExprRow delta = ref_.Theta[static_cast<std::size_t>(s)];
        delta.add(ref_.Theta[static_cast<std::size_t>(s - 1)], -1.0);
        delta.prune(kPruneTol);
        LinearExpr nominal = ref_.theta[static_cast<std::size_t>(s)];
        nominal.add(ref_.theta[static_cast<std::size_t>(s - 1)], -1.0);
        nominal.prune(kPruneTol);

        auto& rt = prog_.ramp[static_cast<std::size_t>(s - 1)];
        for (const auto& e : delta.entries()) add_abs(rt.abs_sum, e.expr);
        rt.nominal = nominal;

        LinearExpr worst = rt.abs_sum;
        worst.add_term(gamma, prog_.ramp_gamma_coef);
        const double r_hi = sys.r_hi[s - 1];
        const double r_lo = sys.r_lo[s - 1];
        if (std::isfinite(r_hi)) {
            LinearExpr up = nominal;
            up.add(worst);
            add_row(tag("rp_hi", s), RowFamily::Ramp, up, -kInf, r_hi * step_s);
        }
        if (std::isfinite(r_lo)) {
            LinearExpr dn = nominal;
            dn.add(worst, -1.0);
            add_row(tag("rp_lo", s), RowFamily::Ramp, dn, r_lo * step_s, kInf);
        }
    }
}

void ProgramBuilder::add_state_constraints() {
    const auto n = data_.counts.n_s;
    const auto& sys = problem_.system;
    const auto& step = data_.dyn.step;
    const auto& act = data_.dyn.activation;
    const double T = data_.dyn.step_hours;
    const double c = sys.c;
    const double a = sys.a;
    const int gamma = prog_.layout.gamma;
    const double half = 0.5 * T;

    // Recursion state for x_j: uncertain coefficients per activation interval,
    // the nominal part without x0, the x0 weight and the accumulated slack.
    std::vector<LinearExpr> coef;  // index i: coefficient of w~_{i+1} without the gamma term
    LinearExpr kappa;
    double F = 1.0;
    double slack_sum = 0.0;          // sum_i f^{j-1-i}
    std::vector<double> kweight;     // f^{j-1-i}

    // sum_i |coef_i + extra_i + nominal K(j,i) gamma| + slack K gamma
    auto uncertain = [&](const std::vector<LinearExpr>& base,
                         const std::vector<const ExprRow*>& extras, double extra_scale) {
        LinearExpr abs_sum;
        std::vector<LinearExpr> col(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < base.size(); ++i) col[i] = base[i];
        for (const ExprRow* row : extras)
            for (const auto& e : row->entries()) col[static_cast<std::size_t>(e.col)].add(e.expr, extra_scale);
        for (std::size_t i = 0; i < kweight.size(); ++i) col[i].add_term(gamma, act.nominal * kweight[i]);
        for (auto& e : col) add_abs(abs_sum, e);
        abs_sum.add_term(gamma, act.slack * slack_sum);
        return abs_sum;
    };

    for (std::int64_t s = 1; s <= n; ++s) {
        const auto si = static_cast<std::size_t>(s);
        const ExprRow& th_prev = ref_.Theta[si - 1];
        const ExprRow& th_cur = ref_.Theta[si];
        const double x_hi = sys.x_hi[s - 1];
        const double x_lo = sys.x_lo[s - 1];
        const double u = sys.u[s - 1];

        // Intra-interval bounds from the state at the start of interval s.
        for (int branch = 0; branch < 2; ++branch) {
            std::vector<const ExprRow*> extras{&th_prev};
            if (branch == 1) extras.push_back(&th_cur);
            const LinearExpr abs_sum = uncertain(coef, extras, c * half);
            const double span = branch == 0 ? half : T;

            LinearExpr nominal = kappa;
            nominal.add(ref_.theta[si - 1], c * half);
            if (branch == 1) nominal.add(ref_.theta[si], c * half);

            LinearExpr y = nominal;
            y.add_constant(F * sys.x0_min + span * (a * x_hi + sys.b * u));
            y.add_term(gamma, -c * span);
            y.add(abs_sum, -1.0);
            add_row(tag(branch == 0 ? "ya" : "yb", s), RowFamily::StateY, y, x_lo, kInf);

            LinearExpr z = nominal;
            z.add_constant(F * sys.x0_max + span * (a * x_lo + sys.b * u));
            z.add_term(gamma, c * span);
            z.add(abs_sum);
            add_row(tag(branch == 0 ? "za" : "zb", s), RowFamily::StateZ, z, -kInf, x_hi);
        }

        // Advance to x_s.
        for (auto& e : coef) e = e.scaled(step.f);
        coef.resize(static_cast<std::size_t>(s));
        for (const auto& e : th_prev.entries()) coef[static_cast<std::size_t>(e.col)].add(e.expr, step.h1);
        for (const auto& e : th_cur.entries()) coef[static_cast<std::size_t>(e.col)].add(e.expr, step.h2);
        for (auto& e : coef) {
            e.prune(kPruneTol);
            shorten(e);
        }
        kappa = kappa.scaled(step.f);
        kappa.add_constant(step.g * u);
        kappa.add(ref_.theta[si - 1], step.h1);
        kappa.add(ref_.theta[si], step.h2);
        kappa.prune(kPruneTol);
        shorten(kappa);
        F *= step.f;
        for (auto& w : kweight) w *= step.f;
        kweight.push_back(1.0);
        slack_sum = slack_sum * step.f + 1.0;

        // x_s lies on the boundary of intervals s and s + 1.
        double hi = x_hi;
        double lo = x_lo;
        if (s < n) {
            hi = std::min(hi, sys.x_hi[s]);
            lo = std::max(lo, sys.x_lo[s]);
        }
        const LinearExpr abs_sum = uncertain(coef, {}, 0.0);
        LinearExpr up = kappa;
        up.add_constant(F * sys.x0_max);
        up.add(abs_sum);
        add_row(tag("x_hi", s), RowFamily::StateX, up, -kInf, hi);
        LinearExpr dn = kappa;
        dn.add_constant(F * sys.x0_min);
        dn.add(abs_sum, -1.0);
        add_row(tag("x_lo", s), RowFamily::StateX, dn, lo, kInf);
    }
}

void ProgramBuilder::set_objective() {
    auto& lp = prog_.lp;
    const auto& lay = prog_.layout;
    const auto& obj = problem_.objective;
    lp.sense = ObjectiveSense::Maximize;
    auto& cost = lp.objective();
    std::fill(cost.begin(), cost.end(), 0.0);
    if (obj.kind == ObjectiveKind::MaxCapacity) {
        cost[static_cast<std::size_t>(lay.gamma)] = 1.0;
        return;
    }
    ObjectiveSpec spec = obj;
    spec.normalize(data_.counts, data_.avg);
    const double t_id = to_hours(data_.ts.intraday);
    double gamma_coef = spec.c_res;
    for (std::int64_t k = 0; k < data_.counts.n_id; ++k)
        gamma_coef += (spec.c_up[k] * spec.rho_up[k] - spec.c_dn[k] * spec.rho_dn[k]) * t_id;
    cost[static_cast<std::size_t>(lay.gamma)] = gamma_coef;

    const VectorXd mu_da = data_.avg.A_da * spec.mu;
    const VectorXd mu_id = data_.avg.A_id * spec.mu;
    for (std::size_t v = 0; v < lay.qda_entries.size(); ++v) {
        const auto [j, m] = lay.qda_entries[v];
        cost[static_cast<std::size_t>(lay.qda_begin) + v] = -spec.c_da[j] * mu_da[m];
    }
    for (std::size_t v = 0; v < lay.qid_entries.size(); ++v) {
        const auto [k, m] = lay.qid_entries[v];
        cost[static_cast<std::size_t>(lay.qid_begin) + v] = -spec.c_id[k] * mu_id[m];
    }
    for (std::int64_t j = 0; j < data_.counts.n_da; ++j)
        cost[static_cast<std::size_t>(lay.qda_vec_begin + j)] = -spec.c_da[j];
    for (std::int64_t k = 0; k < data_.counts.n_id; ++k)
        cost[static_cast<std::size_t>(lay.qid_vec_begin + k)] = -spec.c_id[k];
}

RobustProgram assemble(const BiddingProblem& problem, const ProblemData& data) {
    ProgramBuilder builder(problem, data);
    builder.declare_policy_variables();
    builder.add_power_constraints();
    builder.add_ramp_constraints();
    builder.add_state_constraints();
    builder.set_objective();
    return builder.take();
}

RobustProgram assemble(const BiddingProblem& problem) {
    const ProblemData data = ProblemData::build(problem);
    return assemble(problem, data);
}

AffinePolicy extract_policy(const RobustProgram& prog, const std::vector<double>& x,
                            const IndexCounts& counts) {
    const auto& lay = prog.layout;
    if (x.size() != prog.lp.num_variables())
        throw std::invalid_argument("solution vector does not match the program");
    AffinePolicy p = AffinePolicy::zero(counts);
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> t;
    for (std::size_t v = 0; v < lay.qda_entries.size(); ++v) {
        const double val = x[static_cast<std::size_t>(lay.qda_begin) + v];
        if (val != 0.0) t.emplace_back(lay.qda_entries[v].first, lay.qda_entries[v].second, val);
    }
    p.Q_da.setFromTriplets(t.begin(), t.end());
    t.clear();
    for (std::size_t v = 0; v < lay.qid_entries.size(); ++v) {
        const double val = x[static_cast<std::size_t>(lay.qid_begin) + v];
        if (val != 0.0) t.emplace_back(lay.qid_entries[v].first, lay.qid_entries[v].second, val);
    }
    p.Q_id.setFromTriplets(t.begin(), t.end());
    for (std::int64_t j = 0; j < counts.n_da; ++j) p.q_da[j] = x[static_cast<std::size_t>(lay.qda_vec_begin + j)];
    for (std::int64_t k = 0; k < counts.n_id; ++k) p.q_id[k] = x[static_cast<std::size_t>(lay.qid_vec_begin + k)];
    p.gamma = std::max(0.0, x[static_cast<std::size_t>(lay.gamma)]);
    return p;
}

Solution solve(const RobustProgram& prog, const ProblemData& data, const LpBackend& backend,
               const SolveOptions& options) {
    Solution sol;
    LpResult r = backend.solve(prog.lp, options.lp);
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.seconds = r.seconds;
    sol.message = r.message;
    if (r.status != LpStatus::Optimal) return sol;
    sol.objective = r.objective;

    if (options.minimize_ramp) {
        LinearProgram lp2 = prog.lp;
        LinearExpr obj_row;
        for (std::size_t j = 0; j < lp2.objective().size(); ++j)
            if (lp2.objective()[j] != 0.0) obj_row.add_term(static_cast<int>(j), lp2.objective()[j]);
        const double keep = r.objective - lp2.objective_offset -
                            options.ramp_gamma_rel_tol * std::max(1.0, std::abs(r.objective));
        if (lp2.sense == ObjectiveSense::Maximize) lp2.add_row("keep_obj", obj_row, keep, kInf);
        else lp2.add_row("keep_obj", obj_row, -kInf, r.objective - lp2.objective_offset +
                                                       options.ramp_gamma_rel_tol * std::max(1.0, std::abs(r.objective)));
        std::fill(lp2.objective().begin(), lp2.objective().end(), 0.0);
        lp2.objective_offset = 0.0;
        lp2.sense = ObjectiveSense::Minimize;
        const int rho = lp2.add_variable("ramp_need", 0.0, kInf, 1.0);
        const int gamma = prog.layout.gamma;
        for (std::size_t s = 0; s < prog.ramp.size(); ++s) {
            const auto& rt = prog.ramp[s];
            for (double sign : {1.0, -1.0}) {
                LinearExpr e = rt.abs_sum;
                e.add(rt.nominal, sign);
                e.add_term(gamma, prog.ramp_gamma_coef);
                e.add_term(rho, -prog.ramp_step_seconds);
                lp2.add_row(tag(sign > 0 ? "need_up" : "need_dn", static_cast<std::int64_t>(s + 1)), e,
                            -kInf, 0.0);
            }
        }
        LpResult r2 = backend.solve(lp2, options.lp);
        sol.iterations += r2.iterations;
        sol.seconds += r2.seconds;
        if (r2.status == LpStatus::Optimal) {
            r2.x.resize(prog.lp.num_variables());
            r.x = std::move(r2.x);
            sol.objective = prog.lp.objective_value(r.x);
        } else {
            sol.message += "; ramp refinement: " + r2.message;
        }
    }

    sol.x = std::move(r.x);
    sol.max_row_violation = prog.lp.max_violation(sol.x);
    sol.policy = extract_policy(prog, sol.x, data.counts);
    return sol;
}

VectorXd worst_case_reference_slopes(const AffinePolicy& policy, const ProblemData& data) {
    const AffineReference ref = reference_affine_map(policy, data.M, data.R, data.avg);
    const auto n = data.counts.n_s;
    const double step_s = static_cast<double>(data.ts.system);
    VectorXd out(n);
    for (std::int64_t s = 1; s <= n; ++s) {
        const double abs_sum = (ref.Theta.row(s) - ref.Theta.row(s - 1)).cwiseAbs().sum();
        const double nominal = ref.theta[s] - ref.theta[s - 1];
        out[s - 1] = (abs_sum + std::abs(nominal)) / step_s;
    }
    return out;
}

double required_ramp(const AffinePolicy& policy, const ProblemData& data) {
    const VectorXd slopes = worst_case_reference_slopes(policy, data);
    const double ref = slopes.size() ? slopes.maxCoeff() : 0.0;
    return ref + 2.0 * policy.gamma / static_cast<double>(data.ts.control);
}

}  // namespace sfrbid
