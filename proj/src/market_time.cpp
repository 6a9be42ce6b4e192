#include "sfrbid/market_time.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfrbid {

Timescales Timescales::swiss() { return Timescales{}; }

Timescales Timescales::swiss_with_horizon(Seconds horizon) {
    Timescales ts;
    ts.horizon = horizon;
    ts.reserve_period = horizon;
    return ts;
}

const char* scale_name(Scale scale) {
    switch (scale) {
    case Scale::Reserve: return "reserve";
    case Scale::DayAhead: return "day-ahead";
    case Scale::Intraday: return "intra-day";
    case Scale::System: return "system";
    case Scale::Control: return "control";
    }
    return "?";
}

Seconds scale_length(const Timescales& ts, Scale scale) {
    switch (scale) {
    case Scale::Reserve: return ts.reserve_period;
    case Scale::DayAhead: return ts.day_ahead;
    case Scale::Intraday: return ts.intraday;
    case Scale::System: return ts.system;
    case Scale::Control: return ts.control;
    }
    throw std::invalid_argument("unknown scale");
}

std::int64_t IndexCounts::count(Scale scale) const {
    switch (scale) {
    case Scale::Reserve: return n_res;
    case Scale::DayAhead: return n_da;
    case Scale::Intraday: return n_id;
    case Scale::System: return n_s;
    case Scale::Control: return n_c;
    }
    throw std::invalid_argument("unknown scale");
}

std::vector<std::string> validate(const Timescales& ts) {
    std::vector<std::string> out;
    struct Named {
        const char* name;
        Seconds value;
    };
    const Named chain[] = {{"T_H", ts.horizon},   {"T_RES", ts.reserve_period},
                           {"T_DA", ts.day_ahead}, {"T_ID", ts.intraday},
                           {"T_S", ts.system},     {"T_C", ts.control}};

    bool positive = true;
    for (const auto& d : chain) {
        if (d.value <= 0) {
            out.push_back(std::string(d.name) + " must be positive");
            positive = false;
        }
    }
    if (ts.ramp < 0) out.push_back("T_RP must be non-negative");
    if (ts.intraday_lead < 0) out.push_back("T_ID_lead must be non-negative");
    if (ts.da_gate_offset < 0 || ts.da_gate_offset >= kDay)
        out.push_back("DA_gate_offset must lie in [0, 24 h)");
    if (!positive) return out;

    // Each longer duration must be an integer multiple of every shorter one;
    // checking adjacent pairs is enough because divisibility is transitive.
    for (std::size_t i = 0; i + 1 < std::size(chain); ++i) {
        const auto& longer = chain[i];
        const auto& shorter = chain[i + 1];
        std::ostringstream msg;
        if (longer.value < shorter.value) {
            msg << longer.name << " (" << longer.value << " s) is shorter than " << shorter.name
                << " (" << shorter.value << " s)";
            out.push_back(msg.str());
        } else if (longer.value % shorter.value != 0) {
            msg << longer.name << " (" << longer.value << " s) is not an integer multiple of "
                << shorter.name << " (" << shorter.value << " s)";
            out.push_back(msg.str());
        }
    }

    if (ts.ramp > ts.intraday)
        out.push_back("T_RP (" + std::to_string(ts.ramp) + " s) exceeds T_ID (" +
                      std::to_string(ts.intraday) + " s)");
    if (ts.ramp >= 0 && ts.ramp % ts.system != 0)
        out.push_back("T_RP is not an integer multiple of T_S");
    if (ts.intraday_lead >= 0 && ts.intraday_lead % ts.intraday != 0)
        out.push_back("T_ID_lead is not an integer multiple of T_ID");
    return out;
}

IndexCounts derive_counts(const Timescales& ts) {
    const auto violations = validate(ts);
    if (!violations.empty()) {
        std::string msg = "invalid timescales:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw std::invalid_argument(msg);
    }
    IndexCounts c;
    c.n_res = ts.horizon / ts.reserve_period;
    c.n_da = ts.horizon / ts.day_ahead;
    c.n_id = ts.horizon / ts.intraday;
    c.n_s = ts.horizon / ts.system;
    c.n_c = ts.horizon / ts.control;
    return c;
}

std::int64_t interval_index(double t_seconds, Scale scale, const Timescales& ts) {
    if (!(t_seconds >= 0.0) || t_seconds >= static_cast<double>(ts.horizon))
        throw std::out_of_range("time " + std::to_string(t_seconds) + " s outside horizon [0, " +
                                std::to_string(ts.horizon) + ")");
    const auto len = static_cast<double>(scale_length(ts, scale));
    return static_cast<std::int64_t>(std::floor(t_seconds / len)) + 1;
}

}  // namespace sfrbid
