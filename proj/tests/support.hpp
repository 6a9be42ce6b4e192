#pragma once

#include <random>

#include "sfrbid/robust_lp.hpp"

namespace sfrbid::testing {

/// Home battery: 15 kWh, +-5 kW, ideal, half full.
struct Battery {
    Seconds horizon = kDay;
    Seconds lead = kHour;
    std::int64_t n_da_lb = 0;
    std::int64_t n_id_lb = 0;
    double a = 0.0;
    double p_bar = 5.0;
    double x_hi = 15.0;
    double x0 = 7.5;
    double r_bar = kInf;
};

inline BiddingProblem battery_problem(const Battery& b) {
    BiddingProblem pb;
    pb.ts = Timescales::swiss_with_horizon(b.horizon);
    pb.ts.intraday_lead = b.lead;
    const auto c = derive_counts(pb.ts);
    pb.system = SystemParams::constant(c.n_s, -b.p_bar, b.p_bar, -b.r_bar, b.r_bar, 0.0, b.x_hi,
                                       b.x0, b.x0);
    pb.system.a = b.a;
    pb.system.b = 1.0;
    pb.structure = make_structure(c, pb.ts, b.n_da_lb, b.n_id_lb);
    return pb;
}

/// Horizon of n_s five-minute steps with slots of `per_slot` steps and no
/// day-ahead adjustments (every day-ahead slot lies in the first day).
inline Timescales tiny_timescales(std::int64_t n_s, std::int64_t per_slot, std::int64_t ramp_steps,
                                  std::int64_t lead_slots) {
    Timescales ts;
    ts.control = 1;
    ts.system = 5 * kMinute;
    ts.intraday = per_slot * ts.system;
    ts.day_ahead = ts.intraday;
    ts.horizon = ts.reserve_period = n_s * ts.system;
    ts.ramp = ramp_steps * ts.system;
    ts.intraday_lead = lead_slots * ts.intraday;
    ts.day_aligned = false;
    return ts;
}

/// Random ideal-storage instance with N_S <= 8 for oracle comparisons.
inline BiddingProblem random_tiny_problem(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    const std::int64_t per_slot = pick(1, 2);
    const std::int64_t n_s = per_slot * pick(2, static_cast<int>(8 / per_slot));
    BiddingProblem pb;
    pb.ts = tiny_timescales(n_s, per_slot, pick(1, static_cast<int>(per_slot)), pick(0, 1));
    const auto c = derive_counts(pb.ts);
    SystemParams& s = pb.system;
    s.a = 0.0;
    s.b = 1.0;
    s.c = real(0.8, 1.0);
    s.u = VectorXd(n_s);
    s.p_lo = s.p_hi = s.r_lo = s.r_hi = s.x_lo = s.x_hi = VectorXd(n_s);
    for (std::int64_t i = 0; i < n_s; ++i) {
        s.u[i] = real(-0.5, 0.5);
        s.p_lo[i] = real(-6.0, -1.0);
        s.p_hi[i] = real(1.0, 6.0);
        const bool limited = pick(0, 2) == 0;
        s.r_lo[i] = limited ? -real(0.5, 8.0) : -kInf;
        s.r_hi[i] = limited ? real(0.5, 8.0) : kInf;
        s.x_lo[i] = real(0.0, 1.5);
        s.x_hi[i] = real(2.5, 4.0);
    }
    s.x0_min = real(s.x_lo[0], 2.0);
    s.x0_max = real(s.x0_min, std::min(2.4, s.x_hi[0]));
    pb.structure = make_structure(c, pb.ts, 0, pick(0, 3));
    return pb;
}

}  // namespace sfrbid::testing
