#include "sfrbid/reference_map.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfrbid {

BaselineSchedule BaselineSchedule::from_trades(const VectorXd& e_da, const VectorXd& e_id,
                                               const SparseMatrix& M) {
    if (M.cols() != e_da.size() || M.rows() != e_id.size())
        throw std::invalid_argument("baseline: trade vector lengths do not match M");
    BaselineSchedule b;
    b.e_da = e_da;
    b.e_id = e_id;
    b.e_base = M * e_da + e_id;
    return b;
}

SparseMatrix build_M(const IndexCounts& counts, const Timescales& ts) {
    const Seconds per_da = ts.day_ahead / ts.intraday;
    const double weight = static_cast<double>(ts.intraday) / static_cast<double>(ts.day_ahead);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(counts.n_id));
    for (std::int64_t k = 0; k < counts.n_id; ++k) trips.emplace_back(k, k / per_da, weight);
    SparseMatrix M(counts.n_id, counts.n_da);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

SparseMatrix build_R(const Timescales& ts, const IndexCounts& counts) {
    const double inv_tid = 1.0 / to_hours(ts.intraday);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(2 * (counts.n_s + 1)));

    for (std::int64_t s = 0; s <= counts.n_s; ++s) {
        const Seconds t = s * ts.system;
        // 0-based slot whose plateau owns t (the last breakpoint belongs to the last slot).
        const std::int64_t slot = std::min<std::int64_t>(t / ts.intraday, counts.n_id - 1);

        if (ts.ramp > 0) {
            // Nearest interior boundary B = k T_ID between slots k-1 and k (0-based).
            const std::int64_t k = (t + ts.intraday / 2) / ts.intraday;
            if (k >= 1 && k < counts.n_id) {
                const Seconds offset2 = 2 * (t - k * ts.intraday) + ts.ramp;  // 2(t - B + T_RP/2)
                if (offset2 > 0 && offset2 < 2 * ts.ramp) {
                    const double lambda = static_cast<double>(offset2) / (2.0 * ts.ramp);
                    trips.emplace_back(s, k - 1, (1.0 - lambda) * inv_tid);
                    trips.emplace_back(s, k, lambda * inv_tid);
                    continue;
                }
            }
        }
        trips.emplace_back(s, slot, inv_tid);
    }
    SparseMatrix R(counts.n_s + 1, counts.n_id);
    R.setFromTriplets(trips.begin(), trips.end());
    return R;
}

ReferenceProfile reference_from_baseline(const VectorXd& e_base, const SparseMatrix& R,
                                         const Timescales& ts) {
    if (e_base.size() != R.cols())
        throw std::invalid_argument("reference: baseline has length " +
                                    std::to_string(e_base.size()) + ", expected " +
                                    std::to_string(R.cols()));
    ReferenceProfile p;
    p.breakpoints = R * e_base;
    p.step = ts.system;
    p.stepwise = ts.ramp == 0;
    p.energy = energy_content(p, ts);
    return p;
}

VectorXd energy_content(const ReferenceProfile& p, const Timescales& ts) {
    const Seconds per_slot = ts.intraday / ts.system;
    const std::int64_t n_s = p.breakpoints.size() - 1;
    if (n_s <= 0 || n_s % per_slot != 0)
        throw std::invalid_argument("energy_content: breakpoint count does not fit the T_ID grid");
    const double step_h = to_hours(ts.system);
    VectorXd e = VectorXd::Zero(n_s / per_slot);
    if (p.stepwise) {
        // One plateau per slot; multiplying once keeps e_k/T_ID*T_ID exact.
        for (Eigen::Index k = 0; k < e.size(); ++k)
            e[k] = p.breakpoints[k * per_slot] * to_hours(ts.intraday);
        return e;
    }
    for (std::int64_t j = 0; j < n_s; ++j) {
        e[j / per_slot] += step_h * 0.5 * (p.breakpoints[j] + p.breakpoints[j + 1]);
    }
    return e;
}

double eval_reference(const ReferenceProfile& p, double t_seconds) {
    const std::int64_t n_s = p.breakpoints.size() - 1;
    const double horizon = static_cast<double>(n_s * p.step);
    if (!(t_seconds >= 0.0) || t_seconds > horizon)
        throw std::out_of_range("eval_reference: t outside [0, T_H]");
    const double pos = t_seconds / static_cast<double>(p.step);
    auto s = static_cast<std::int64_t>(std::floor(pos));
    if (s >= n_s) return p.breakpoints[n_s];
    if (p.stepwise) return p.breakpoints[s];
    const double frac = pos - static_cast<double>(s);
    return p.breakpoints[s] + (p.breakpoints[s + 1] - p.breakpoints[s]) * frac;
}

}  // namespace sfrbid
