#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "sfrbid/verify_sim.hpp"
#include "support.hpp"

using namespace sfrbid;
using namespace sfrbid::testing;

namespace {

const LpBackend& highs() {
    static const auto backend = make_backend("highs");
    return *backend;
}

struct Solved {
    BiddingProblem problem;
    ProblemData data;
    Solution sol;
};

Solved run(const BiddingProblem& pb) {
    Solved s{pb, ProblemData::build(pb), {}};
    const RobustProgram prog = assemble(pb, s.data);
    s.sol = solve(prog, s.data, highs());
    return s;
}

SignalSpec square(std::int64_t period) {
    SignalSpec s{SignalKind::SquareWave};
    s.period_steps = period;
    return s;
}

VerificationReport check(const Solved& s, const SignalSpec& spec, double gamma_scale = 1.0) {
    AffinePolicy p = s.sol.policy;
    p.gamma *= gamma_scale;
    return check_feasibility(p, s.problem.system, s.data, make_signal(spec, s.data.ts));
}

// Classical RK4 on dx/dt = a x + b u + c p(t) with t in hours and p linear
// between control points; `sub` steps per control step.
std::vector<double> rk4_state(const std::vector<double>& p, const SystemParams& sys, const Timescales& ts,
                              double x0, int sub) {
    const double h = to_hours(ts.control) / sub;
    const std::int64_t m = ts.system / ts.control;
    std::vector<double> out{x0};
    double x = x0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        const double u = sys.u[static_cast<std::int64_t>(k) / m];
        auto rhs = [&](double xv, double frac) {
            return sys.a * xv + sys.b * u + sys.c * (p[k] + frac * (p[k + 1] - p[k]));
        };
        for (int j = 0; j < sub; ++j) {
            const double f0 = static_cast<double>(j) / sub, f1 = (j + 0.5) / sub, f2 = (j + 1.0) / sub;
            const double k1 = rhs(x, f0);
            const double k2 = rhs(x + 0.5 * h * k1, f1);
            const double k3 = rhs(x + 0.5 * h * k2, f1);
            const double k4 = rhs(x + h * k3, f2);
            x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("signal kinds") {
    const Timescales ts = Timescales::swiss_with_horizon(kHour);
    const auto zero = make_signal({SignalKind::Zero}, ts);
    CHECK(zero.samples.size() == 3601);
    for (double v : zero.samples) CHECK(v == 0.0);
    for (double v : make_signal({SignalKind::Sustained, -1.0}, ts).samples) CHECK(v == -1.0);
    const auto sq = make_signal(square(2), ts);
    for (std::size_t k = 0; k < sq.samples.size(); ++k) CHECK(sq.samples[k] == (k % 2 ? -1.0 : 1.0));
    CHECK_THROWS_AS(make_signal(square(1), ts), std::invalid_argument);

    SignalSpec r{SignalKind::UniformRandom};
    r.seed = 5;
    const auto a = make_signal(r, ts), b = make_signal(r, ts);
    CHECK(a.samples == b.samples);
    r.seed = 6;
    CHECK(make_signal(r, ts).samples != a.samples);
    SignalSpec walk{SignalKind::RandomWalk};
    walk.seed = 5;
    walk.walk_step = 0.1;
    const auto wk = make_signal(walk, ts);
    for (std::size_t k = 0; k < wk.samples.size(); ++k) {
        CHECK(std::abs(wk.samples[k]) <= 1.0);
        CHECK(std::abs(a.samples[k]) <= 1.0);
        if (k) CHECK(std::abs(wk.samples[k] - wk.samples[k - 1]) <= 0.1 + 1e-15);
    }
}

TEST_CASE("signal averaging") {
    const Timescales ts = Timescales::swiss_with_horizon(kHour);
    const VectorXd ones = average_signal(make_signal({SignalKind::Sustained, 1.0}, ts), ts);
    CHECK(ones.size() == 12);
    for (Eigen::Index s = 0; s < ones.size(); ++s) CHECK(ones[s] == 1.0);
    const VectorXd alt = average_signal(make_signal(square(2), ts), ts);
    CHECK(alt.cwiseAbs().maxCoeff() == 0.0);
    // period 600: each 300-sample interval holds 299 flat segments and one switching segment
    const VectorXd slow = average_signal(make_signal(square(600), ts), ts);
    for (Eigen::Index s = 0; s < slow.size(); ++s)
        CHECK(slow[s] == doctest::Approx((s % 2 ? -299.0 : 299.0) / 300.0).epsilon(1e-14));
    SignalSpec r{SignalKind::UniformRandom};
    r.seed = 3;
    const auto w = make_signal(r, ts);
    const VectorXd avg = average_signal(w, ts);
    CHECK(avg.cwiseAbs().maxCoeff() <= 1.0);
    // fine midpoint quadrature of the interpolant
    for (Eigen::Index s = 0; s < avg.size(); ++s) {
        double acc = 0.0;
        const int n = 300 * 4;
        for (int i = 0; i < n; ++i) acc += eval_signal(w, 300.0 * s + (i + 0.5) * 300.0 / n);
        CHECK(avg[s] == doctest::Approx(acc / n).epsilon(1e-12));
    }
    CHECK_THROWS_AS(eval_signal(w, 3600.5), std::out_of_range);
}

TEST_CASE("target power combines reference and activation") {
    const Timescales ts = Timescales::swiss_with_horizon(kHour);
    const auto c = derive_counts(ts);
    VectorXd e(c.n_id);
    e << 0.5, 1.0, -0.25, 0.0;
    const ReferenceProfile ref = reference_from_baseline(e, build_R(ts, c), ts);
    const auto up = make_signal({SignalKind::Sustained, 1.0}, ts);
    const auto sq = make_signal(square(2), ts);
    for (double t : {0.0, 17.0, 899.5, 1234.25, 3600.0}) {
        CHECK(target_power_at(ref, 0.0, sq, t) == eval_reference(ref, t));
        CHECK(target_power_at(ref, 0.7, up, t) == doctest::Approx(eval_reference(ref, t) + 0.7));
    }
    // flat part of the reference, one switching step: slope 2 gamma / T_C
    const double slope = target_power_at(ref, 0.7, sq, 101.0) - target_power_at(ref, 0.7, sq, 100.0);
    CHECK(slope == doctest::Approx(-1.4));
    CHECK(target_power_at(ref, 0.7, sq, 100.5) == doctest::Approx(eval_reference(ref, 100.5)));
    CHECK_THROWS_AS(target_power_at(ref, 0.7, sq, -1.0), std::out_of_range);
}

TEST_CASE("state simulation") {
    const Timescales ts = Timescales::swiss_with_horizon(kHour);
    const auto c = derive_counts(ts);
    SystemParams sys = SystemParams::constant(c.n_s, -5, 5, -kInf, kInf, 0, 15, 7.5, 7.5);
    const std::vector<double> idle(static_cast<std::size_t>(c.n_c + 1), 0.0);
    for (double x : simulate_state(idle, sys, ts, 4.0)) CHECK(x == 4.0);
    const std::vector<double> flat(static_cast<std::size_t>(c.n_c + 1), 2.0);
    const auto x = simulate_state(flat, sys, ts, 1.0);
    for (std::size_t k = 0; k < x.size(); k += 97)
        CHECK(x[k] == doctest::Approx(1.0 + 2.0 * static_cast<double>(k) / 3600.0).epsilon(1e-12));

    sys.a = -0.1;
    sys.b = 0.8;
    sys.c = 0.9;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (Eigen::Index i = 0; i < sys.u.size(); ++i) sys.u[i] = U(rng);
    SignalSpec r{SignalKind::UniformRandom};
    r.seed = 9;
    const auto w = make_signal(r, ts);
    std::vector<double> p(w.samples.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = 1.5 + 3.0 * w.samples[k];
    const auto exact = simulate_state(p, sys, ts, 6.0);
    const auto fine = rk4_state(p, sys, ts, 6.0, 100);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(exact[k] - fine[k]) / std::abs(fine[k]));
    CHECK(worst < 1e-8);
}

TEST_CASE("optimal policy passes the standard signals") {
    Battery b;
    b.n_id_lb = 1;
    const Solved s = run(battery_problem(b));
    REQUIRE(s.sol.status == LpStatus::Optimal);
    for (const auto& spec : standard_signals(100, 5)) {
        const auto rep = check(s, spec);
        CAPTURE(spec.label());
        CHECK(rep.feasible);
        CHECK(rep.state_violation <= 1e-6);
    }
}

TEST_CASE("inflated reserve is caught under sustained activation") {
    const Solved s = run(battery_problem({}));
    REQUIRE(s.sol.status == LpStatus::Optimal);
    CHECK(check(s, {SignalKind::Sustained, 1.0}).feasible);
    const auto rep = check(s, {SignalKind::Sustained, 1.0}, 1.01);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.state_violation > 1e-6);
    bool state_listed = false;
    for (const auto& v : rep.worst) state_listed = state_listed || v.family == "state";
    CHECK(state_listed);
    // the energy limit is attained: even a 1e-4 increase is detected
    CHECK_FALSE(check(s, {SignalKind::Sustained, 1.0}, 1.0001).feasible);
    std::ostringstream out;
    write_report(rep, out);
    CHECK(out.str().find("feasible no") != std::string::npos);
}

TEST_CASE("ramp limit is attained by the fastest square wave") {
    Battery b;
    b.x_hi = 60.0;
    b.x0 = 30.0;
    b.r_bar = 2.0;
    const Solved s = run(battery_problem(b));
    REQUIRE(s.sol.status == LpStatus::Optimal);
    CHECK(s.sol.policy.gamma == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(check(s, square(2)).feasible);
    const auto rep = check(s, square(2), 1.0001);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.ramp_violation > 1e-6);
}

TEST_CASE("zero reserve with a feasible fixed schedule passes any signal") {
    const BiddingProblem pb = battery_problem({});
    const ProblemData data = ProblemData::build(pb);
    AffinePolicy p = AffinePolicy::zero(data.counts);
    p.q_id = VectorXd::Constant(data.counts.n_id, 0.0);
    for (const auto& spec : standard_signals(7, 2)) {
        const auto rep = check_feasibility(p, pb.system, data, make_signal(spec, data.ts));
        CHECK(rep.feasible);
        CHECK(rep.power_violation == 0.0);
        CHECK(rep.ramp_violation == 0.0);
        CHECK(rep.state_violation == 0.0);
    }
}

TEST_CASE("oracle with a single interval") {
    for (double x_hi : {15.0, 0.2}) {
        BiddingProblem pb;
        pb.ts = tiny_timescales(1, 1, 1, 0);
        pb.system = SystemParams::constant(1, -5, 5, -kInf, kInf, 0, x_hi, x_hi / 2, x_hi / 2);
        pb.structure = make_structure(derive_counts(pb.ts), pb.ts, 0, 0);
        const auto o = vertex_oracle(pb, highs());
        REQUIRE(o.status == LpStatus::Optimal);
        CHECK(o.vertices == 2);
        const double analytic = std::min(5.0, (x_hi / 2) / (5.0 / 60.0));
        CHECK(o.gamma == doctest::Approx(analytic).epsilon(1e-9));
        CHECK(run(pb).sol.policy.gamma == doctest::Approx(analytic).epsilon(1e-9));
    }
}

TEST_CASE("oracle and robust program agree on a six step toy") {
    BiddingProblem pb;
    pb.ts = tiny_timescales(6, 3, 2, 0);
    pb.system = SystemParams::constant(6, -4, 5, -3, 3, 0.5, 3.0, 1.0, 1.5);
    pb.system.b = 1.0;
    pb.system.u << 0.3, -0.2, 0.0, 0.4, -0.5, 0.1;
    pb.structure = make_structure(derive_counts(pb.ts), pb.ts, 0, 1);
    const auto o = vertex_oracle(pb, highs());
    const auto s = run(pb);
    REQUIRE(o.status == LpStatus::Optimal);
    REQUIRE(s.sol.status == LpStatus::Optimal);
    CHECK(o.vertices == 64);
    CHECK(std::abs(o.gamma - s.sol.policy.gamma) <= 1e-8 * std::max(1.0, o.gamma));
}

TEST_CASE("without adjustments both reduce to the fixed baseline formula") {
    BiddingProblem pb;
    pb.ts = tiny_timescales(6, 1, 1, 0);
    pb.system = SystemParams::constant(6, -5, 5, -kInf, kInf, 0, 2, 1, 1);
    pb.structure = make_structure(derive_counts(pb.ts), pb.ts, 0, 0);
    const double expected = 1.0 / 0.5;  // half the buffer over 30 minutes
    CHECK(vertex_oracle(pb, highs()).gamma == doctest::Approx(expected).epsilon(1e-9));
    CHECK(run(pb).sol.policy.gamma == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("oracle and robust program agree on random tiny instances") {
    std::mt19937_64 rng(2024);
    int compared = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const BiddingProblem pb = random_tiny_problem(rng);
        const auto o = vertex_oracle(pb, highs());
        const auto s = run(pb);
        CHECK(o.status == s.sol.status);
        if (o.status != LpStatus::Optimal || s.sol.status != LpStatus::Optimal) continue;
        ++compared;
        CHECK(std::abs(o.gamma - s.sol.policy.gamma) <= 1e-8 * std::max(1.0, std::abs(o.gamma)));
    }
    CHECK(compared >= 6);
}

TEST_CASE("oracle preconditions") {
    BiddingProblem pb;
    pb.ts = tiny_timescales(4, 1, 1, 0);
    pb.system = SystemParams::constant(4, -5, 5, -kInf, kInf, 0, 2, 1, 1);
    pb.structure = make_structure(derive_counts(pb.ts), pb.ts, 0, 0);
    pb.system.a = -0.1;
    CHECK_THROWS_AS(vertex_oracle(pb, highs()), std::invalid_argument);
    BiddingProblem big;
    big.ts = tiny_timescales(13, 1, 1, 0);
    big.system = SystemParams::constant(13, -5, 5, -kInf, kInf, 0, 2, 1, 1);
    big.structure = make_structure(derive_counts(big.ts), big.ts, 0, 0);
    CHECK_THROWS_AS(vertex_oracle(big, highs()), std::invalid_argument);
}
