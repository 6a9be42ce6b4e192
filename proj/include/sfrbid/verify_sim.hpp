#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sfrbid/lp_model.hpp"
#include "sfrbid/robust_lp.hpp"

namespace sfrbid {

enum class SignalKind { Zero, Sustained, SquareWave, UniformRandom, RandomWalk };

struct SignalSpec {
    SignalKind kind = SignalKind::Zero;
    double level = 1.0;               // Sustained: +1 or -1
    std::int64_t period_steps = 2;    // SquareWave: full period in T_C steps
    double walk_step = 0.05;          // RandomWalk: max change per T_C step
    std::uint64_t seed = 0;

    std::string label() const;
};

/// Normalised activation sampled on the T_C grid: N_C + 1 samples in
/// [-1, 1], linear in between.
struct ActivationSignal {
    std::vector<double> samples;
    Seconds step = 1;
};

ActivationSignal make_signal(const SignalSpec& spec, const Timescales& ts);

/// Mean of the signal over every T_S interval.
VectorXd average_signal(const ActivationSignal& w, const Timescales& ts);

/// Value of the activation interpolant at t seconds, 0 <= t <= T_H.
double eval_signal(const ActivationSignal& w, double t_seconds);

/// p_ref(t) + gamma w(t). Throws std::out_of_range outside the horizon.
double target_power_at(const ReferenceProfile& ref, double gamma, const ActivationSignal& w,
                       double t_seconds);

/// p(t) = p_ref(t) + gamma w(t) on the T_C grid (N_C + 1 values), where the
/// reference follows the trades the policy places for this activation.
std::vector<double> target_power(const AffinePolicy& policy, const ProblemData& data,
                                 const ActivationSignal& w);

/// Exact buffer trajectory on the T_C grid for a power trace that is linear
/// between grid points.
std::vector<double> simulate_state(const std::vector<double>& power, const SystemParams& sys,
                                   const Timescales& ts, double x0);

struct Violation {
    std::string family;  // power | ramp | state
    double time_s = 0.0;
    double value = 0.0;
    double bound = 0.0;
};

struct VerificationReport {
    std::string signal;
    bool feasible = true;
    double tolerance = 0.0;
    // Largest violations divided by max(1, largest |bound| of the family).
    double power_violation = 0.0;
    double ramp_violation = 0.0;
    double state_violation = 0.0;
    std::int64_t points_checked = 0;
    std::vector<Violation> worst;  // at most one per family, only when infeasible
};

/// Simulates the policy under one activation signal from both ends of the
/// initial state range and checks power, ramp and state bounds.
VerificationReport check_feasibility(const AffinePolicy& policy, const SystemParams& sys,
                                     const ProblemData& data, const ActivationSignal& w,
                                     double tol = 1e-6);

void write_report(const VerificationReport& report, std::ostream& out);

/// The standard battery of signals: zero, sustained +-1, square waves of a few
/// periods, and `random_count` seeded random and random-walk signals.
std::vector<SignalSpec> standard_signals(std::uint64_t seed, int random_count);

struct OracleResult {
    LpStatus status = LpStatus::Error;
    double gamma = 0.0;
    std::size_t vertices = 0;
    std::size_t rows = 0;
};

/// Solves the capacity-maximisation problem by enumerating every vertex of
/// the averaged activation cube instead of using dual reformulations.
/// Requires a = 0 and at most 12 T_S intervals.
OracleResult vertex_oracle(const BiddingProblem& problem, const LpBackend& backend,
                           const SolverOptions& options = {});

}  // namespace sfrbid
