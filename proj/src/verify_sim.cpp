#include "sfrbid/verify_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace sfrbid {

std::string SignalSpec::label() const {
    switch (kind) {
    case SignalKind::Zero: return "zero";
    case SignalKind::Sustained: return level >= 0 ? "sustained_up" : "sustained_down";
    case SignalKind::SquareWave: return "square_" + std::to_string(period_steps);
    case SignalKind::UniformRandom: return "random_" + std::to_string(seed);
    case SignalKind::RandomWalk: return "walk_" + std::to_string(seed);
    }
    return "?";
}

ActivationSignal make_signal(const SignalSpec& spec, const Timescales& ts) {
    const IndexCounts counts = derive_counts(ts);
    ActivationSignal w;
    w.step = ts.control;
    w.samples.assign(static_cast<std::size_t>(counts.n_c + 1), 0.0);
    std::mt19937_64 rng(spec.seed);
    switch (spec.kind) {
    case SignalKind::Zero: break;
    case SignalKind::Sustained:
        std::fill(w.samples.begin(), w.samples.end(), std::clamp(spec.level, -1.0, 1.0));
        break;
    case SignalKind::SquareWave: {
        if (spec.period_steps < 2) throw std::invalid_argument("square wave period must be >= 2 steps");
        const std::int64_t half = spec.period_steps / 2;
        for (std::size_t k = 0; k < w.samples.size(); ++k)
            w.samples[k] = ((static_cast<std::int64_t>(k) / half) % 2 == 0) ? 1.0 : -1.0;
        break;
    }
    case SignalKind::UniformRandom: {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& v : w.samples) v = u(rng);
        break;
    }
    case SignalKind::RandomWalk: {
        std::uniform_real_distribution<double> u(-spec.walk_step, spec.walk_step);
        double v = 0.0;
        for (auto& s : w.samples) {
            s = v;
            v = std::clamp(v + u(rng), -1.0, 1.0);
        }
        break;
    }
    }
    return w;
}

VectorXd average_signal(const ActivationSignal& w, const Timescales& ts) {
    const IndexCounts counts = derive_counts(ts);
    if (w.step != ts.control || static_cast<std::int64_t>(w.samples.size()) != counts.n_c + 1)
        throw std::invalid_argument("signal does not match the control grid");
    const std::int64_t m = ts.system / ts.control;
    VectorXd out(counts.n_s);
    for (std::int64_t s = 0; s < counts.n_s; ++s) {
        double acc = 0.0;
        for (std::int64_t k = s * m; k < (s + 1) * m; ++k)
            acc += 0.5 * (w.samples[static_cast<std::size_t>(k)] + w.samples[static_cast<std::size_t>(k + 1)]);
        out[s] = acc / static_cast<double>(m);
    }
    return out;
}

double eval_signal(const ActivationSignal& w, double t) {
    const double end = static_cast<double>(w.samples.size() - 1) * static_cast<double>(w.step);
    if (!(t >= 0.0 && t <= end)) throw std::out_of_range("time outside the signal horizon");
    const double pos = t / static_cast<double>(w.step);
    const auto k = std::min(static_cast<std::size_t>(pos), w.samples.size() - 2);
    const double frac = pos - static_cast<double>(k);
    return (1.0 - frac) * w.samples[k] + frac * w.samples[k + 1];
}

double target_power_at(const ReferenceProfile& ref, double gamma, const ActivationSignal& w,
                       double t) {
    const double w_t = eval_signal(w, t);
    return eval_reference(ref, t) + gamma * w_t;
}

std::vector<double> target_power(const AffinePolicy& policy, const ProblemData& data,
                                 const ActivationSignal& w) {
    const VectorXd w_avg = average_signal(w, data.ts);
    const RealizedSchedules trades = realized_schedules(policy, data.avg, w_avg);
    const VectorXd e_base = data.M * trades.e_da + trades.e_id;
    const ReferenceProfile ref = reference_from_baseline(e_base, data.R, data.ts);
    std::vector<double> p(w.samples.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double t = static_cast<double>(k) * static_cast<double>(w.step);
        p[k] = eval_reference(ref, t) + policy.gamma * w.samples[k];
    }
    return p;
}

std::vector<double> simulate_state(const std::vector<double>& power, const SystemParams& sys,
                                   const Timescales& ts, double x0) {
    const StepCoefficients step = discretize(sys.a, sys.b, sys.c, to_hours(ts.control));
    const std::int64_t m = ts.system / ts.control;
    std::vector<double> x(power.size());
    x[0] = x0;
    for (std::size_t k = 0; k + 1 < power.size(); ++k) {
        const double u = sys.u[static_cast<std::int64_t>(k) / m];
        x[k + 1] = step.f * x[k] + step.g * u + step.h1 * power[k] + step.h2 * power[k + 1];
    }
    return x;
}

namespace {

struct Bounds {
    double lo;
    double hi;
};

/// Bounds at control point k: interior points use their interval, points on
/// the T_S grid must satisfy both neighbouring intervals.
Bounds bounds_at(const VectorXd& lo, const VectorXd& hi, std::int64_t k, std::int64_t m,
                 std::int64_t n_s) {
    const std::int64_t s = k / m;
    if (k % m != 0) return {lo[s], hi[s]};
    if (s == 0) return {lo[0], hi[0]};
    if (s == n_s) return {lo[n_s - 1], hi[n_s - 1]};
    return {std::max(lo[s - 1], lo[s]), std::min(hi[s - 1], hi[s])};
}

double family_scale(const VectorXd& lo, const VectorXd& hi) {
    double s = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (std::isfinite(lo[i])) s = std::max(s, std::abs(lo[i]));
        if (std::isfinite(hi[i])) s = std::max(s, std::abs(hi[i]));
    }
    return s;
}

struct Tracker {
    std::string family;
    double scale = 1.0;
    double worst = 0.0;
    Violation at;

    void check(double value, double lo, double hi, double t) {
        const double v = std::max(lo - value, value - hi) / scale;
        if (v > worst) {
            worst = v;
            at = {family, t, value, value > hi ? hi : lo};
        }
    }
};

}  // namespace

VerificationReport check_feasibility(const AffinePolicy& policy, const SystemParams& sys,
                                     const ProblemData& data, const ActivationSignal& w,
                                     double tol) {
    const auto& ts = data.ts;
    const std::int64_t m = ts.system / ts.control;
    const std::int64_t n_s = data.counts.n_s;
    const double t_c = static_cast<double>(ts.control);
    const std::vector<double> p = target_power(policy, data, w);

    Tracker power{"power", family_scale(sys.p_lo, sys.p_hi), 0.0, {}};
    Tracker ramp{"ramp", family_scale(sys.r_lo, sys.r_hi), 0.0, {}};
    Tracker state{"state", family_scale(sys.x_lo, sys.x_hi), 0.0, {}};

    VerificationReport rep;
    rep.tolerance = tol;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto ki = static_cast<std::int64_t>(k);
        const double t = static_cast<double>(k) * t_c;
        const Bounds b = bounds_at(sys.p_lo, sys.p_hi, ki, m, n_s);
        power.check(p[k], b.lo, b.hi, t);
        if (k + 1 < p.size()) {
            const std::int64_t s = ki / m;
            ramp.check((p[k + 1] - p[k]) / t_c, sys.r_lo[s], sys.r_hi[s], t);
        }
    }
    rep.points_checked = static_cast<std::int64_t>(p.size());
    for (double x0 : {sys.x0_min, sys.x0_max}) {
        const std::vector<double> x = simulate_state(p, sys, ts, x0);
        for (std::size_t k = 1; k < x.size(); ++k) {
            const Bounds b = bounds_at(sys.x_lo, sys.x_hi, static_cast<std::int64_t>(k), m, n_s);
            state.check(x[k], b.lo, b.hi, static_cast<double>(k) * t_c);
        }
        if (sys.x0_max == sys.x0_min) break;
    }

    rep.power_violation = power.worst;
    rep.ramp_violation = ramp.worst;
    rep.state_violation = state.worst;
    for (const Tracker* tr : {&power, &ramp, &state})
        if (tr->worst > tol) {
            rep.feasible = false;
            rep.worst.push_back(tr->at);
        }
    return rep;
}

void write_report(const VerificationReport& r, std::ostream& out) {
    out << "signal " << r.signal << '\n';
    out << "feasible " << (r.feasible ? "yes" : "no") << '\n';
    out << "tolerance " << r.tolerance << '\n';
    out << "points " << r.points_checked << '\n';
    out << "power_violation " << r.power_violation << '\n';
    out << "ramp_violation " << r.ramp_violation << '\n';
    out << "state_violation " << r.state_violation << '\n';
    for (const auto& v : r.worst)
        out << "violation " << v.family << " t=" << v.time_s << "s value=" << v.value
            << " bound=" << v.bound << '\n';
}

std::vector<SignalSpec> standard_signals(std::uint64_t seed, int random_count) {
    std::vector<SignalSpec> out;
    out.push_back({SignalKind::Zero});
    out.push_back({SignalKind::Sustained, 1.0});
    out.push_back({SignalKind::Sustained, -1.0});
    for (std::int64_t period : {2, 600, 3600}) {
        SignalSpec s{SignalKind::SquareWave};
        s.period_steps = period;
        out.push_back(s);
    }
    for (int i = 0; i < random_count; ++i) {
        SignalSpec r{SignalKind::UniformRandom};
        r.seed = seed + static_cast<std::uint64_t>(i);
        out.push_back(r);
        SignalSpec walk{SignalKind::RandomWalk};
        walk.seed = seed + static_cast<std::uint64_t>(i);
        out.push_back(walk);
    }
    return out;
}

OracleResult vertex_oracle(const BiddingProblem& problem, const LpBackend& backend,
                           const SolverOptions& options) {
    const ProblemData data = ProblemData::build(problem);
    const auto& sys = problem.system;
    const auto& c = data.counts;
    if (sys.a != 0.0) throw std::invalid_argument("vertex oracle requires a = 0");
    if (c.n_s > 12) throw std::invalid_argument("vertex oracle supports at most 12 intervals");

    LinearProgram lp;
    lp.sense = ObjectiveSense::Maximize;
    const auto da = problem.structure.mask_da.entries();
    const auto id = problem.structure.mask_id.entries();
    std::vector<int> da_var, id_var, qda_var, qid_var;
    for (const auto& [j, m] : da) da_var.push_back(lp.add_variable("QDA" + std::to_string(j) + "_" + std::to_string(m)));
    for (const auto& [k, m] : id) id_var.push_back(lp.add_variable("QID" + std::to_string(k) + "_" + std::to_string(m)));
    for (std::int64_t j = 0; j < c.n_da; ++j) qda_var.push_back(lp.add_variable("qDA" + std::to_string(j)));
    for (std::int64_t k = 0; k < c.n_id; ++k) qid_var.push_back(lp.add_variable("qID" + std::to_string(k)));
    const int gamma = lp.add_variable("gamma", problem.gamma_min, kInf, 1.0);

    const MatrixXd M = MatrixXd(data.M);
    const MatrixXd R = MatrixXd(data.R);
    const MatrixXd A_da = MatrixXd(data.avg.A_da);
    const MatrixXd A_id = MatrixXd(data.avg.A_id);
    const double T = to_hours(data.ts.system);
    const double step_s = static_cast<double>(data.ts.system);
    const double t_c = static_cast<double>(data.ts.control);
    const std::int64_t n = c.n_s;

    auto bp_hi = [&](const VectorXd& v, std::int64_t s) {
        if (s == 0) return v[0];
        if (s == n) return v[n - 1];
        return std::min(v[s - 1], v[s]);
    };
    auto bp_lo = [&](const VectorXd& v, std::int64_t s) {
        if (s == 0) return v[0];
        if (s == n) return v[n - 1];
        return std::max(v[s - 1], v[s]);
    };

    OracleResult res;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t code = 0; code < count; ++code) {
        VectorXd w(n);
        for (std::int64_t i = 0; i < n; ++i) w[i] = ((code >> i) & 1u) ? 1.0 : -1.0;
        const VectorXd wda = A_da * w;
        const VectorXd wid = A_id * w;

        std::vector<LinearExpr> e_da(static_cast<std::size_t>(c.n_da)), e_id(static_cast<std::size_t>(c.n_id));
        for (std::size_t v = 0; v < da.size(); ++v)
            e_da[static_cast<std::size_t>(da[v].first)].add_term(da_var[v], wda[da[v].second]);
        for (std::size_t v = 0; v < id.size(); ++v)
            e_id[static_cast<std::size_t>(id[v].first)].add_term(id_var[v], wid[id[v].second]);
        for (std::int64_t j = 0; j < c.n_da; ++j) e_da[static_cast<std::size_t>(j)].add_term(qda_var[static_cast<std::size_t>(j)], 1.0);
        for (std::int64_t k = 0; k < c.n_id; ++k) e_id[static_cast<std::size_t>(k)].add_term(qid_var[static_cast<std::size_t>(k)], 1.0);

        std::vector<LinearExpr> base(static_cast<std::size_t>(c.n_id));
        for (std::int64_t k = 0; k < c.n_id; ++k) {
            base[static_cast<std::size_t>(k)] = e_id[static_cast<std::size_t>(k)];
            for (std::int64_t j = 0; j < c.n_da; ++j)
                if (M(k, j) != 0.0) base[static_cast<std::size_t>(k)].add(e_da[static_cast<std::size_t>(j)], M(k, j));
        }
        std::vector<LinearExpr> p(static_cast<std::size_t>(n + 1));
        for (std::int64_t s = 0; s <= n; ++s)
            for (std::int64_t k = 0; k < c.n_id; ++k)
                if (R(s, k) != 0.0) p[static_cast<std::size_t>(s)].add(base[static_cast<std::size_t>(k)], R(s, k));

        const std::string tag = "v" + std::to_string(code) + "_";
        for (std::int64_t s = 0; s <= n; ++s) {
            LinearExpr hi = p[static_cast<std::size_t>(s)];
            hi.add_term(gamma, 1.0);
            lp.add_row(tag + "ph" + std::to_string(s), hi, -kInf, bp_hi(sys.p_hi, s));
            LinearExpr lo = p[static_cast<std::size_t>(s)];
            lo.add_term(gamma, -1.0);
            lp.add_row(tag + "pl" + std::to_string(s), lo, bp_lo(sys.p_lo, s), kInf);
        }
        for (std::int64_t s = 1; s <= n; ++s) {
            LinearExpr d = p[static_cast<std::size_t>(s)];
            d.add(p[static_cast<std::size_t>(s - 1)], -1.0);
            if (std::isfinite(sys.r_hi[s - 1])) {
                LinearExpr e = d;
                e.add_term(gamma, 2.0 * step_s / t_c);
                lp.add_row(tag + "rh" + std::to_string(s), e, -kInf, sys.r_hi[s - 1] * step_s);
            }
            if (std::isfinite(sys.r_lo[s - 1])) {
                LinearExpr e = d;
                e.add_term(gamma, -2.0 * step_s / t_c);
                lp.add_row(tag + "rl" + std::to_string(s), e, sys.r_lo[s - 1] * step_s, kInf);
            }
        }

        // Buffer energy relative to x0 at the end of every interval.
        std::vector<LinearExpr> x(static_cast<std::size_t>(n + 1));
        for (std::int64_t s = 1; s <= n; ++s) {
            auto& xs = x[static_cast<std::size_t>(s)];
            xs = x[static_cast<std::size_t>(s - 1)];
            xs.add_constant(T * sys.b * sys.u[s - 1]);
            xs.add(p[static_cast<std::size_t>(s - 1)], 0.5 * T * sys.c);
            xs.add(p[static_cast<std::size_t>(s)], 0.5 * T * sys.c);
            xs.add_term(gamma, T * sys.c * w[s - 1]);
        }
        for (std::int64_t s = 1; s <= n; ++s) {
            const double x_lo = sys.x_lo[s - 1];
            const double x_hi = sys.x_hi[s - 1];
            const double u = sys.u[s - 1];
            const auto& prev = x[static_cast<std::size_t>(s - 1)];
            for (int branch = 0; branch < 2; ++branch) {
                const double span = branch == 0 ? 0.5 * T : T;
                LinearExpr mid = prev;
                mid.add_constant(span * sys.b * u);
                mid.add(p[static_cast<std::size_t>(s - 1)], 0.5 * T * sys.c);
                if (branch == 1) mid.add(p[static_cast<std::size_t>(s)], 0.5 * T * sys.c);
                LinearExpr y = mid;
                y.add_constant(sys.x0_min);
                y.add_term(gamma, -sys.c * span);
                lp.add_row(tag + (branch ? "yb" : "ya") + std::to_string(s), y, x_lo, kInf);
                LinearExpr z = mid;
                z.add_constant(sys.x0_max);
                z.add_term(gamma, sys.c * span);
                lp.add_row(tag + (branch ? "zb" : "za") + std::to_string(s), z, -kInf, x_hi);
            }
            double hi = x_hi, lo = x_lo;
            if (s < n) {
                hi = std::min(hi, sys.x_hi[s]);
                lo = std::max(lo, sys.x_lo[s]);
            }
            LinearExpr up = x[static_cast<std::size_t>(s)];
            up.add_constant(sys.x0_max);
            lp.add_row(tag + "xh" + std::to_string(s), up, -kInf, hi);
            LinearExpr dn = x[static_cast<std::size_t>(s)];
            dn.add_constant(sys.x0_min);
            lp.add_row(tag + "xl" + std::to_string(s), dn, lo, kInf);
        }
    }
    res.vertices = count;
    res.rows = lp.num_rows();
    const LpResult r = backend.solve(lp, options);
    res.status = r.status;
    if (r.status == LpStatus::Optimal) res.gamma = r.x[static_cast<std::size_t>(gamma)];
    return res;
}

}  // namespace sfrbid
