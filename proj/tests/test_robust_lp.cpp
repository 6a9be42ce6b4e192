#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "sfrbid/robust_lp.hpp"
#include "support.hpp"

using namespace sfrbid;
using namespace sfrbid::testing;

namespace {

const LpBackend& highs() {
    static const auto backend = make_backend("highs");
    return *backend;
}

struct Solved {
    ProblemData data;
    RobustProgram prog;
    Solution sol;
};

Solved run(const BiddingProblem& pb, const SolveOptions& options = {}) {
    Solved s{ProblemData::build(pb), {}, {}};
    s.prog = assemble(pb, s.data);
    s.sol = solve(s.prog, s.data, highs(), options);
    return s;
}

double gamma_of(const BiddingProblem& pb) {
    const Solved s = run(pb);
    REQUIRE(s.sol.status == LpStatus::Optimal);
    return s.sol.policy.gamma;
}

int row_index(const LinearProgram& lp, const std::string& name) {
    for (std::size_t r = 0; r < lp.num_rows(); ++r)
        if (lp.rows()[r].name == name) return static_cast<int>(r);
    return -1;
}

double activity(const LpRow& row, const std::vector<double>& x) {
    double v = 0.0;
    for (const auto& t : row.coefs) v += t.coef * x[static_cast<std::size_t>(t.var)];
    return v;
}

// Replaces every epigraph variable by the exact |expr| and recomputes the
// definition variables that depend on them, in variable order.
std::vector<double> tighten(const RobustProgram& prog, std::vector<double> x) {
    std::map<int, const Epigraph*> epi;
    for (const auto& e : prog.epigraph) epi[e.var] = &e;
    std::map<std::string, int> rows;
    for (std::size_t r = 0; r < prog.lp.num_rows(); ++r)
        if (prog.family[r] == RowFamily::Definition) rows[prog.lp.rows()[r].name] = static_cast<int>(r);
    for (std::size_t v = static_cast<std::size_t>(prog.layout.aux_begin); v < x.size(); ++v) {
        if (auto it = epi.find(static_cast<int>(v)); it != epi.end()) {
            x[v] = std::abs(it->second->expr.evaluate(x));
            continue;
        }
        const auto rit = rows.find("def" + std::to_string(v));
        REQUIRE(rit != rows.end());
        double rest = 0.0;
        for (const auto& t : prog.lp.rows()[static_cast<std::size_t>(rit->second)].coefs)
            if (t.var != static_cast<int>(v)) rest += t.coef * x[static_cast<std::size_t>(t.var)];
        x[v] = -rest;
    }
    return x;
}

}  // namespace

TEST_CASE("two hour horizon: half the buffer over the horizon") {
    Battery b;
    b.horizon = 2 * kHour;
    CHECK(gamma_of(battery_problem(b)) == doctest::Approx(3.75).epsilon(1e-7));
}

TEST_CASE("one day without adjustments: 6.25 % of rated power") {
    const Solved s = run(battery_problem({}));
    REQUIRE(s.sol.status == LpStatus::Optimal);
    CHECK(std::abs(s.sol.policy.gamma - 0.3125) < 1e-7);
    CHECK(s.prog.layout.qda_entries.empty());
    CHECK(s.prog.layout.qid_entries.empty());
    CHECK(s.prog.num_aux() > 0);
    CHECK(s.sol.max_row_violation < 1e-7);
}

TEST_CASE("Q_ID variables match the mask population") {
    Battery b;
    b.n_id_lb = 3;
    const BiddingProblem pb = battery_problem(b);
    const RobustProgram prog = assemble(pb);
    CHECK(static_cast<std::int64_t>(prog.layout.qid_entries.size()) == pb.structure.mask_id.population());
    // rows 6.. use three slots, rows 6-7 fewer (the band is clipped at slot 1)
    CHECK(prog.layout.qid_entries.size() == 3 * 91 - 3);
    CHECK(prog.layout.gamma == prog.layout.qid_vec_begin + 96);
    CHECK(prog.lp.variables()[static_cast<std::size_t>(prog.layout.gamma)].lower == 0.0);
}

TEST_CASE("power bounds at shared breakpoints take the tighter neighbour") {
    BiddingProblem pb;
    pb.ts = tiny_timescales(2, 1, 1, 0);
    pb.system = SystemParams::constant(2, -5, 5, -kInf, kInf, 0, 10, 5, 5);
    pb.system.p_hi[1] = 3.0;
    pb.system.p_lo[0] = -2.0;
    pb.structure = make_structure(derive_counts(pb.ts), pb.ts, 0, 0);
    const RobustProgram prog = assemble(pb);
    const auto& rows = prog.lp.rows();
    CHECK(rows[static_cast<std::size_t>(row_index(prog.lp, "pw_hi0"))].upper == 5.0);
    CHECK(rows[static_cast<std::size_t>(row_index(prog.lp, "pw_hi1"))].upper == 3.0);
    CHECK(rows[static_cast<std::size_t>(row_index(prog.lp, "pw_hi2"))].upper == 3.0);
    CHECK(rows[static_cast<std::size_t>(row_index(prog.lp, "pw_lo0"))].lower == -2.0);
    CHECK(rows[static_cast<std::size_t>(row_index(prog.lp, "pw_lo1"))].lower == -2.0);
    CHECK(rows[static_cast<std::size_t>(row_index(prog.lp, "pw_lo2"))].lower == -5.0);
}

TEST_CASE("symbolic reference evaluates to the numeric affine map") {
    Battery b;
    b.n_id_lb = 2;
    b.horizon = 2 * kDay;
    b.n_da_lb = 5;
    const BiddingProblem pb = battery_problem(b);
    const ProblemData data = ProblemData::build(pb);
    ProgramBuilder builder(pb, data);
    builder.declare_policy_variables();
    const auto& prog = builder.program();
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> x(prog.lp.num_variables());
    for (auto& v : x) v = U(rng);
    const AffinePolicy pol = extract_policy(prog, x, data.counts);
    const AffineReference num = reference_affine_map(pol, data.M, data.R, data.avg);
    const auto& sym = builder.reference();
    double worst = 0.0;
    for (std::int64_t s = 0; s <= data.counts.n_s; ++s) {
        worst = std::max(worst, std::abs(sym.theta[s].evaluate(x) - num.theta[s]));
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(data.counts.n_s);
        for (const auto& e : sym.Theta[s].entries()) row[e.col] = e.expr.evaluate(x);
        worst = std::max(worst, (row - num.Theta.row(s)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("epigraph variables can be made exact at the optimum") {
    Battery b;
    b.n_id_lb = 1;
    const Solved s = run(battery_problem(b));
    REQUIRE(s.sol.status == LpStatus::Optimal);
    for (const auto& e : s.prog.epigraph)
        CHECK(s.sol.x[static_cast<std::size_t>(e.var)] >= std::abs(e.expr.evaluate(s.sol.x)) - 1e-7);
    const std::vector<double> exact = tighten(s.prog, s.sol.x);
    CHECK(s.prog.lp.max_violation(exact) < 1e-7);
    CHECK(exact[static_cast<std::size_t>(s.prog.layout.gamma)] == s.sol.policy.gamma);
}

TEST_CASE("robust power rows agree with vertex enumeration") {
    std::mt19937_64 rng(43);
    int checked = 0;
    for (int trial = 0; trial < 8; ++trial) {
        const BiddingProblem pb = random_tiny_problem(rng);
        const Solved s = run(pb);
        if (s.sol.status != LpStatus::Optimal) continue;
        ++checked;
        const std::vector<double> x = tighten(s.prog, s.sol.x);
        const AffineReference ref = reference_affine_map(s.sol.policy, s.data.M, s.data.R, s.data.avg);
        const auto n = s.data.counts.n_s;
        for (std::int64_t p = 0; p <= n; ++p) {
            double vmax = -kInf;
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                double v = ref.theta[p];
                for (std::int64_t i = 0; i < n; ++i) v += ref.Theta(p, i) * ((mask >> i) & 1 ? 1.0 : -1.0);
                vmax = std::max(vmax, v);
            }
            const auto& row = s.prog.lp.rows()[static_cast<std::size_t>(row_index(s.prog.lp, "pw_hi" + std::to_string(p)))];
            const double lp_bound = activity(row, x) - s.sol.policy.gamma;
            CHECK(std::abs(lp_bound - vmax) < 1e-9 * std::max(1.0, std::abs(vmax)));
        }
    }
    CHECK(checked >= 3);
}

TEST_CASE("ramp rows: one kW of reserve needs 2 kW/s") {
    Battery b;
    b.x_hi = 60.0;
    b.x0 = 30.0;
    b.r_bar = 2.0;
    BiddingProblem pb = battery_problem(b);
    pb.gamma_min = 1.0;
    const Solved ok = run(pb);
    REQUIRE(ok.sol.status == LpStatus::Optimal);
    CHECK(ok.sol.policy.gamma == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(required_ramp(ok.sol.policy, ok.data) <= 2.0 + 1e-7);
    b.r_bar = 1.99;
    BiddingProblem tight = battery_problem(b);
    tight.gamma_min = 1.0;
    CHECK(run(tight).sol.status == LpStatus::Infeasible);
}

TEST_CASE("required ramp of a flat reference") {
    const BiddingProblem pb = battery_problem({});
    const ProblemData data = ProblemData::build(pb);
    AffinePolicy p = AffinePolicy::zero(data.counts);
    CHECK(required_ramp(p, data) == 0.0);
    p.gamma = 0.5263 * 5.0;
    CHECK(required_ramp(p, data) / 5.0 * 100.0 == doctest::Approx(105.26).epsilon(1e-12));
    p.q_id = VectorXd::Constant(data.counts.n_id, 0.3);
    CHECK(required_ramp(p, data) == doctest::Approx(2.0 * p.gamma).epsilon(1e-12));
}

TEST_CASE("fixed power reference drifts the state linearly") {
    for (double x_hi : {1.9, 2.1}) {
        BiddingProblem pb;
        pb.ts = Timescales::swiss_with_horizon(2 * kHour);
        const auto c = derive_counts(pb.ts);
        pb.system = SystemParams::constant(c.n_s, 1.0, 1.0, -kInf, kInf, 0.0, x_hi, 0.0, 0.0);
        pb.structure = make_structure(c, pb.ts, 0, 0);
        const Solved s = run(pb);
        if (x_hi < 2.0) {
            CHECK(s.sol.status == LpStatus::Infeasible);
        } else {
            REQUIRE(s.sol.status == LpStatus::Optimal);
            CHECK(s.sol.policy.gamma == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("infeasible toy: reserve forced with zero power range") {
    Battery b;
    b.horizon = 2 * kHour;
    b.p_bar = 0.0;
    BiddingProblem pb = battery_problem(b);
    pb.gamma_min = 1.0;
    CHECK(run(pb).sol.status == LpStatus::Infeasible);
}

TEST_CASE("larger bounds and longer lookbacks never reduce the optimum") {
    Battery b;
    double prev = -1.0;
    for (std::int64_t lb : {0, 1, 2, 4}) {
        b.n_id_lb = lb;
        const double g = gamma_of(battery_problem(b));
        CHECK(g >= prev - 1e-7);
        prev = g;
    }
    b.n_id_lb = 1;
    const double base = gamma_of(battery_problem(b));
    Battery wider = b;
    wider.x_hi = 18.0;
    wider.x0 = 7.5;
    CHECK(gamma_of(battery_problem(wider)) >= base - 1e-7);
    Battery stronger = b;
    stronger.p_bar = 7.0;
    CHECK(gamma_of(battery_problem(stronger)) >= base - 1e-7);
    Battery limited = b;
    limited.r_bar = 4.0;
    CHECK(gamma_of(battery_problem(limited)) <= base + 1e-7);
}

TEST_CASE("scaling every physical bound scales the optimum") {
    Battery b;
    b.n_id_lb = 1;
    b.r_bar = 8.0;
    const double base = gamma_of(battery_problem(b));
    for (double alpha : {0.5, 3.0}) {
        Battery s = b;
        s.p_bar *= alpha;
        s.x_hi *= alpha;
        s.x0 *= alpha;
        s.r_bar *= alpha;
        CHECK(gamma_of(battery_problem(s)) == doctest::Approx(alpha * base).epsilon(1e-6));
    }
}

TEST_CASE("capacity price alone reproduces the capacity optimum") {
    Battery b;
    b.n_id_lb = 1;
    BiddingProblem pb = battery_problem(b);
    const double g1 = gamma_of(pb);
    pb.objective.kind = ObjectiveKind::ExpectedProfit;
    pb.objective.c_res = 1.0;
    const Solved s = run(pb);
    REQUIRE(s.sol.status == LpStatus::Optimal);
    CHECK(s.sol.policy.gamma == doctest::Approx(g1).epsilon(1e-7));
    CHECK(s.sol.objective == doctest::Approx(g1).epsilon(1e-7));
}

TEST_CASE("expected profit equals its definition at the optimum") {
    Battery b;
    b.n_id_lb = 2;
    BiddingProblem pb = battery_problem(b);
    const auto c = derive_counts(pb.ts);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto& o = pb.objective;
    o.kind = ObjectiveKind::ExpectedProfit;
    o.c_res = 10.0;
    o.c_da = VectorXd(c.n_da);
    o.c_id = VectorXd(c.n_id);
    o.c_up = VectorXd(c.n_id);
    o.c_dn = VectorXd(c.n_id);
    o.rho_up = VectorXd(c.n_id);
    o.rho_dn = VectorXd(c.n_id);
    for (auto i = 0; i < c.n_da; ++i) o.c_da[i] = 0.05 + 0.1 * U(rng);
    for (auto k = 0; k < c.n_id; ++k) {
        // equal prices in both markets: any spread would be an unbounded arbitrage
        o.c_id[k] = o.c_da[k / 4];
        o.c_up[k] = 0.2 * U(rng);
        o.c_dn[k] = 0.2 * U(rng);
        o.rho_up[k] = 0.5 * U(rng);
        o.rho_dn[k] = 0.5 * U(rng);
    }
    const Solved s = run(pb);
    REQUIRE(s.sol.status == LpStatus::Optimal);
    // mu defaults to rho_up - rho_dn held within each slot
    VectorXd mu(c.n_s);
    for (auto i = 0; i < c.n_s; ++i) mu[i] = o.rho_up[i / 3] - o.rho_dn[i / 3];
    const auto sched = realized_schedules(s.sol.policy, s.data.avg, mu);
    double regulation = 0.0;
    for (auto k = 0; k < c.n_id; ++k) regulation += (o.c_up[k] * o.rho_up[k] - o.c_dn[k] * o.rho_dn[k]) * 0.25;
    const double profit = o.c_res * s.sol.policy.gamma + regulation * s.sol.policy.gamma -
                          o.c_da.dot(sched.e_da) - o.c_id.dot(sched.e_id);
    CHECK(s.sol.objective == doctest::Approx(profit).epsilon(1e-8));

    BiddingProblem bad = pb;
    bad.objective.rho_up[0] = 0.8;
    bad.objective.rho_dn[0] = 0.5;
    CHECK_THROWS_AS(assemble(bad), std::invalid_argument);
}

TEST_CASE("identical input gives identical output") {
    Battery b;
    b.n_id_lb = 1;
    const BiddingProblem pb = battery_problem(b);
    const Solved a = run(pb);
    const Solved c = run(pb);
    REQUIRE(a.sol.status == LpStatus::Optimal);
    CHECK(a.sol.x == c.sol.x);
    std::ostringstream ma, mc;
    write_mps(a.prog.lp, ma);
    write_mps(c.prog.lp, mc);
    CHECK(ma.str() == mc.str());
}

TEST_CASE("ramp refinement keeps the optimum and does not raise the ramp") {
    Battery b;
    b.n_id_lb = 1;
    const BiddingProblem pb = battery_problem(b);
    const Solved plain = run(pb);
    SolveOptions opt;
    opt.minimize_ramp = true;
    const Solved refined = run(pb, opt);
    REQUIRE(refined.sol.status == LpStatus::Optimal);
    CHECK(refined.sol.policy.gamma == doctest::Approx(plain.sol.policy.gamma).epsilon(1e-8));
    CHECK(required_ramp(refined.sol.policy, refined.data) <= required_ramp(plain.sol.policy, plain.data) + 1e-9);
    CHECK(refined.sol.max_row_violation < 1e-7);
}

TEST_CASE("invalid programs are rejected") {
    BiddingProblem pb = battery_problem({});
    pb.ts.ramp = 0;
    CHECK_THROWS_AS(assemble(pb), std::invalid_argument);
    BiddingProblem neg = battery_problem({});
    neg.gamma_min = -1.0;
    CHECK_THROWS_AS(assemble(neg), std::invalid_argument);
    BiddingProblem wrong = battery_problem({});
    Battery other;
    other.horizon = 2 * kDay;
    wrong.structure = battery_problem(other).structure;
    CHECK_THROWS_AS(assemble(wrong), std::invalid_argument);
}
