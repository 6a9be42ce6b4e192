#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sfrbid {

/// Duration in whole seconds. Every index computation works on these.
using Seconds = std::int64_t;

constexpr Seconds kMinute = 60;
constexpr Seconds kHour = 3600;
constexpr Seconds kDay = 86400;

inline double to_hours(Seconds s) { return static_cast<double>(s) / 3600.0; }

/// Market and system timescales. The horizon is assumed to start at the
/// beginning of a delivery day (see `day_aligned`).
struct Timescales {
    Seconds horizon = 7 * kDay;         // T_H
    Seconds reserve_period = 7 * kDay;  // T_RES
    Seconds day_ahead = kHour;          // T_DA
    Seconds intraday = 15 * kMinute;    // T_ID
    Seconds system = 5 * kMinute;       // T_S
    Seconds control = 1;                // T_C
    Seconds ramp = 10 * kMinute;        // T_RP
    Seconds intraday_lead = kHour;      // T_ID_lead
    Seconds da_gate_offset = 11 * kHour;
    bool day_aligned = true;

    /// The Swiss setting: one-week horizon and tendering period.
    static Timescales swiss();
    /// Swiss sub-scales over a shorter horizon (T_RES = T_H).
    static Timescales swiss_with_horizon(Seconds horizon);
};

enum class Scale { Reserve, DayAhead, Intraday, System, Control };

const char* scale_name(Scale scale);
Seconds scale_length(const Timescales& ts, Scale scale);

struct IndexCounts {
    std::int64_t n_res = 0;
    std::int64_t n_da = 0;
    std::int64_t n_id = 0;
    std::int64_t n_s = 0;
    std::int64_t n_c = 0;

    std::int64_t count(Scale scale) const;
};

/// Every violated ordering/divisibility relation, in human-readable form.
/// An empty list means the timescales are consistent.
std::vector<std::string> validate(const Timescales& ts);

/// Throws std::invalid_argument listing the violations when `ts` is invalid.
IndexCounts derive_counts(const Timescales& ts);

/// 1-based index k of the interval [(k-1)T, kT) on `scale` containing t.
/// Throws std::out_of_range for t outside [0, T_H).
std::int64_t interval_index(double t_seconds, Scale scale, const Timescales& ts);

}  // namespace sfrbid
