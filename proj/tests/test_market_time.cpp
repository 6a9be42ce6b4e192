#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sfrbid/market_time.hpp"

using namespace sfrbid;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

Timescales random_valid(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Timescales ts;
    ts.control = pick(1, 3);
    ts.system = ts.control * pick(1, 6);
    ts.intraday = ts.system * pick(1, 4);
    ts.day_ahead = ts.intraday * pick(1, 4);
    ts.reserve_period = ts.day_ahead * pick(1, 3);
    ts.horizon = ts.reserve_period * pick(1, 3);
    ts.ramp = ts.system * pick(0, static_cast<int>(ts.intraday / ts.system));
    ts.intraday_lead = ts.intraday * pick(0, 4);
    ts.day_aligned = false;
    return ts;
}

}  // namespace

TEST_CASE("Swiss setting is valid") {
    CHECK(validate(Timescales::swiss()).empty());
    const auto c = derive_counts(Timescales::swiss());
    CHECK(c.n_res == 1);
    CHECK(c.n_da == 168);
    CHECK(c.n_id == 672);
    CHECK(c.n_s == 2016);
    CHECK(c.n_c == 604800);
}

TEST_CASE("one-day horizon counts") {
    const auto c = derive_counts(Timescales::swiss_with_horizon(kDay));
    CHECK(c.n_da == 24);
    CHECK(c.n_id == 96);
    CHECK(c.n_s == 288);
}

TEST_CASE("non-divisible system step is reported") {
    Timescales ts = Timescales::swiss();
    ts.system = 7 * kMinute;
    ts.ramp = 7 * kMinute;
    const auto v = validate(ts);
    CHECK_FALSE(v.empty());
    CHECK_THROWS_AS(derive_counts(ts), std::invalid_argument);
}

TEST_CASE("ramp longer than the intra-day slot is reported") {
    Timescales ts = Timescales::swiss();
    ts.ramp = 20 * kMinute;
    CHECK(mentions(validate(ts), "T_RP"));
}

TEST_CASE("ramp must be a multiple of the system step and lead a multiple of the slot") {
    Timescales ts = Timescales::swiss();
    ts.ramp = 7 * kMinute;
    CHECK_FALSE(validate(ts).empty());
    ts = Timescales::swiss();
    ts.intraday_lead = 20 * kMinute;
    CHECK_FALSE(validate(ts).empty());
}

TEST_CASE("every violation is listed") {
    Timescales ts = Timescales::swiss();
    ts.system = 7 * kMinute;
    ts.ramp = 20 * kMinute;
    ts.intraday_lead = 20 * kMinute;
    CHECK(validate(ts).size() >= 3);
}

TEST_CASE("horizon equal to one system step") {
    Timescales ts;
    ts.horizon = ts.reserve_period = ts.day_ahead = ts.intraday = ts.system = 5 * kMinute;
    ts.control = 1;
    ts.ramp = 0;
    ts.intraday_lead = 0;
    ts.day_aligned = false;
    REQUIRE(validate(ts).empty());
    CHECK(derive_counts(ts).n_s == 1);
}

TEST_CASE("interval index boundaries") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    CHECK(interval_index(0.0, Scale::System, ts) == 1);
    CHECK(interval_index(static_cast<double>(ts.system), Scale::System, ts) == 2);
    const double end = static_cast<double>(ts.horizon) - 1e-6;
    for (Scale s : {Scale::Reserve, Scale::DayAhead, Scale::Intraday, Scale::System, Scale::Control})
        CHECK(interval_index(end, s, ts) == c.count(s));
    CHECK_THROWS_AS(interval_index(static_cast<double>(ts.horizon), Scale::System, ts), std::out_of_range);
    CHECK_THROWS_AS(interval_index(-1.0, Scale::System, ts), std::out_of_range);
}

TEST_CASE("random valid timescales: counts multiply back to the horizon") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Timescales ts = random_valid(rng);
        REQUIRE(validate(ts).empty());
        const auto c = derive_counts(ts);
        CHECK(c.n_s * ts.system == ts.horizon);
        CHECK(c.n_id * ts.intraday == ts.horizon);
        CHECK(c.n_da * ts.day_ahead == ts.horizon);
        CHECK(c.n_res * ts.reserve_period == ts.horizon);
        CHECK(c.n_c * ts.control == ts.horizon);
    }
}

TEST_CASE("interval index is monotone and reaches every interval") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Timescales ts = random_valid(rng);
        const auto c = derive_counts(ts);
        for (Scale s : {Scale::DayAhead, Scale::Intraday, Scale::System}) {
            std::int64_t prev = 1;
            std::vector<bool> seen(static_cast<std::size_t>(c.count(s) + 1), false);
            for (Seconds t = 0; t < ts.horizon; t += ts.control) {
                const auto k = interval_index(static_cast<double>(t), s, ts);
                CHECK(k >= prev);
                prev = k;
                seen[static_cast<std::size_t>(k)] = true;
            }
            for (std::int64_t k = 1; k <= c.count(s); ++k) CHECK(seen[static_cast<std::size_t>(k)]);
        }
    }
}
