#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sfrbid/policy.hpp"

using namespace sfrbid;

namespace {

SparseMatrix random_on_mask(const Mask& mask, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::Triplet<double>> trips;
    for (auto [r, c] : mask.entries()) trips.emplace_back(r, c, u(rng));
    SparseMatrix Q(mask.rows(), mask.cols());
    Q.setFromTriplets(trips.begin(), trips.end());
    return Q;
}

VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

AffinePolicy random_policy(const IndexCounts& c, const PolicyStructure& st, std::mt19937_64& rng) {
    AffinePolicy p = AffinePolicy::zero(c);
    p.Q_da = random_on_mask(st.mask_da, rng);
    p.Q_id = random_on_mask(st.mask_id, rng);
    p.q_da = random_vector(rng, c.n_da, 0.0, 3.0);
    p.q_id = random_vector(rng, c.n_id);
    p.gamma = 0.5;
    return p;
}

}  // namespace

TEST_CASE("intra-day averaging blocks hold three entries of 1/3") {
    const Timescales ts = Timescales::swiss();
    const auto c = derive_counts(ts);
    const Averaging avg = build_averaging(c, ts);
    const MatrixXd A = MatrixXd(avg.A_id);
    REQUIRE(A.rows() == 672);
    REQUIRE(A.cols() == 2016);
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        CHECK(A.row(k).sum() == doctest::Approx(1.0).epsilon(1e-15));
        for (Eigen::Index s = 3 * k; s < 3 * k + 3; ++s) CHECK(A(k, s) == 1.0 / 3.0);
    }
    CHECK(avg.A_id.nonZeros() == 2016);
    for (Eigen::Index k = 0; k < avg.A_da.rows(); ++k)
        CHECK(MatrixXd(avg.A_da).row(k).sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("averaging to T_ID then to T_DA equals averaging to T_DA") {
    const Timescales ts = Timescales::swiss_with_horizon(2 * kDay);
    const auto c = derive_counts(ts);
    const Averaging avg = build_averaging(c, ts);
    Timescales coarse = ts;
    coarse.system = ts.intraday;
    coarse.ramp = 0;
    const auto cc = derive_counts(coarse);
    const Averaging id_to_da = build_averaging(cc, coarse);
    const MatrixXd composed = MatrixXd(id_to_da.A_da) * MatrixXd(avg.A_id);
    CHECK((composed - MatrixXd(avg.A_da)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("day-ahead mask staircase with a 24 h lookback") {
    const Timescales ts = Timescales::swiss();
    const auto c = derive_counts(ts);
    const Mask m = build_da_mask(c, ts, 24);
    for (std::int64_t r = 0; r < 24; ++r) CHECK(m.row(r).empty());
    // 1-based: rows 25-48 use columns 1-11, rows 49-72 use columns 12-35
    for (std::int64_t r = 24; r < 48; ++r) {
        REQUIRE(m.row(r).size() == 11);
        CHECK(m.row(r).front() == 0);
        CHECK(m.row(r).back() == 10);
    }
    for (std::int64_t r = 48; r < 72; ++r) {
        REQUIRE(m.row(r).size() == 24);
        CHECK(m.row(r).front() == 11);
        CHECK(m.row(r).back() == 34);
    }
    CHECK(build_da_mask(c, ts, 0).population() == 0);
}

TEST_CASE("day-ahead lookback saturates at one day") {
    const Timescales ts = Timescales::swiss();
    const auto c = derive_counts(ts);
    const Mask ref = build_da_mask(c, ts, 24);
    for (std::int64_t lb : {25, 48, 100, 168}) CHECK(build_da_mask(c, ts, lb) == ref);
    CHECK_FALSE(build_da_mask(c, ts, 23) == ref);
}

TEST_CASE("intra-day mask with a one hour lead") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const Mask m = build_id_mask(c, ts, 1);
    for (std::int64_t k = 0; k < 5; ++k) CHECK(m.row(k).empty());
    for (std::int64_t k = 5; k < c.n_id; ++k) {
        REQUIRE(m.row(k).size() == 1);
        CHECK(m.row(k).front() == k - 5);
    }
    CHECK(build_id_mask(c, ts, 0).population() == 0);
}

TEST_CASE("intra-day mask with a 15 min lead") {
    Timescales ts = Timescales::swiss_with_horizon(kDay);
    ts.intraday_lead = 15 * kMinute;
    const auto c = derive_counts(ts);
    const Mask m = build_id_mask(c, ts, 1);
    CHECK(m.row(0).empty());
    CHECK(m.row(1).empty());
    for (std::int64_t k = 2; k < c.n_id; ++k) {
        REQUIRE(m.row(k).size() == 1);
        CHECK(m.row(k).front() == k - 2);
    }
}

TEST_CASE("masks respect causality and grow with the lookback") {
    for (Seconds lead : {Seconds{0}, 15 * kMinute, kHour, 3 * kHour}) {
        Timescales ts = Timescales::swiss_with_horizon(3 * kDay);
        ts.intraday_lead = lead;
        const auto c = derive_counts(ts);
        Mask prev_id = build_id_mask(c, ts, 0);
        Mask prev_da = build_da_mask(c, ts, 0);
        for (std::int64_t lb = 1; lb <= 30; ++lb) {
            const Mask id = build_id_mask(c, ts, lb);
            const Mask da = build_da_mask(c, ts, lb);
            for (auto [k, i] : id.entries()) {
                // slot i is over before the gate of slot k closes
                CHECK((i + 1) * ts.intraday <= k * ts.intraday - ts.intraday_lead);
                CHECK(i >= k - lead / ts.intraday - lb);
            }
            for (auto [r, col] : da.entries()) {
                const std::int64_t day = r * ts.day_ahead / kDay;
                CHECK((col + 1) * ts.day_ahead <= (day - 1) * kDay + ts.da_gate_offset);
            }
            for (auto [k, i] : prev_id.entries()) CHECK(id(k, i));
            for (auto [r, col] : prev_da.entries()) CHECK(da(r, col));
            prev_id = id;
            prev_da = da;
        }
    }
}

TEST_CASE("check_policy rejects entries outside the mask") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const PolicyStructure st = make_structure(c, ts, 0, 1);
    AffinePolicy p = AffinePolicy::zero(c);
    CHECK_NOTHROW(check_policy(p, st));
    p.Q_id.insert(5, 0) = 1.0;
    CHECK_NOTHROW(check_policy(p, st));
    p.Q_id.insert(4, 0) = 1.0;
    CHECK_THROWS_AS(check_policy(p, st), std::invalid_argument);
    AffinePolicy q = AffinePolicy::zero(c);
    q.gamma = -1.0;
    CHECK_THROWS_AS(check_policy(q, st), std::invalid_argument);
}

TEST_CASE("reference map without adjustments is the offset reference") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const SparseMatrix M = build_M(c, ts);
    const SparseMatrix R = build_R(ts, c);
    const Averaging avg = build_averaging(c, ts);
    std::mt19937_64 rng(1);
    AffinePolicy p = AffinePolicy::zero(c);
    p.q_da = random_vector(rng, c.n_da);
    p.q_id = random_vector(rng, c.n_id);
    const AffineReference ref = reference_affine_map(p, M, R, avg);
    CHECK(ref.Theta.isZero(0.0));
    const VectorXd expected = R * (M * p.q_da + p.q_id);
    CHECK((ref.theta - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("identity on the intra-day band gives R A_ID on that band") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const PolicyStructure st = make_structure(c, ts, 0, 1);
    AffinePolicy p = AffinePolicy::zero(c);
    std::vector<Eigen::Triplet<double>> trips;
    for (auto [k, i] : st.mask_id.entries()) trips.emplace_back(k, i, 1.0);
    p.Q_id.setFromTriplets(trips.begin(), trips.end());
    const Averaging avg = build_averaging(c, ts);
    const SparseMatrix R = build_R(ts, c);
    const AffineReference ref = reference_affine_map(p, build_M(c, ts), R, avg);
    // Theta(s, j) = sum_k R(s, k) [slot k-5 contains step j] / 3
    MatrixXd expected = MatrixXd::Zero(c.n_s + 1, c.n_s);
    const MatrixXd Rd = MatrixXd(R);
    for (Eigen::Index s = 0; s <= c.n_s; ++s)
        for (Eigen::Index k = 5; k < c.n_id; ++k)
            for (Eigen::Index j = 3 * (k - 5); j < 3 * (k - 4); ++j) expected(s, j) += Rd(s, k) / 3.0;
    CHECK((ref.Theta - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two routes to the reference agree") {
    const Timescales ts = Timescales::swiss_with_horizon(3 * kDay);
    const auto c = derive_counts(ts);
    const PolicyStructure st = make_structure(c, ts, 24, 4);
    const SparseMatrix M = build_M(c, ts);
    const SparseMatrix R = build_R(ts, c);
    const Averaging avg = build_averaging(c, ts);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const AffinePolicy p = random_policy(c, st, rng);
        REQUIRE_NOTHROW(check_policy(p, st));
        const AffineReference ref = reference_affine_map(p, M, R, avg);
        const VectorXd w = random_vector(rng, c.n_s);
        const RealizedSchedules sched = realized_schedules(p, avg, w);
        const BaselineSchedule base = BaselineSchedule::from_trades(sched.e_da, sched.e_id, M);
        const VectorXd via_trades = reference_from_baseline(base.e_base, R, ts).breakpoints;
        const VectorXd via_map = ref.Theta * w + ref.theta;
        CHECK((via_trades - via_map).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reference map is linear in the policy") {
    const Timescales ts = Timescales::swiss_with_horizon(2 * kDay);
    const auto c = derive_counts(ts);
    const PolicyStructure st = make_structure(c, ts, 24, 2);
    const SparseMatrix M = build_M(c, ts);
    const SparseMatrix R = build_R(ts, c);
    const Averaging avg = build_averaging(c, ts);
    std::mt19937_64 rng(4);
    const AffinePolicy p1 = random_policy(c, st, rng);
    const AffinePolicy p2 = random_policy(c, st, rng);
    const double alpha = 0.7, beta = -1.3;
    AffinePolicy mix = AffinePolicy::zero(c);
    mix.Q_da = alpha * p1.Q_da + beta * p2.Q_da;
    mix.Q_id = alpha * p1.Q_id + beta * p2.Q_id;
    mix.q_da = alpha * p1.q_da + beta * p2.q_da;
    mix.q_id = alpha * p1.q_id + beta * p2.q_id;
    const auto r1 = reference_affine_map(p1, M, R, avg);
    const auto r2 = reference_affine_map(p2, M, R, avg);
    const auto rm = reference_affine_map(mix, M, R, avg);
    CHECK((rm.Theta - (alpha * r1.Theta + beta * r2.Theta)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rm.theta - (alpha * r1.theta + beta * r2.theta)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("realized schedules") {
    const Timescales ts = Timescales::swiss_with_horizon(2 * kDay);
    const auto c = derive_counts(ts);
    const PolicyStructure st = make_structure(c, ts, 24, 2);
    const Averaging avg = build_averaging(c, ts);
    std::mt19937_64 rng(6);
    const AffinePolicy p = random_policy(c, st, rng);

    const auto at_zero = realized_schedules(p, avg, VectorXd::Zero(c.n_s));
    CHECK((at_zero.e_da - p.q_da).cwiseAbs().maxCoeff() == 0.0);
    CHECK((at_zero.e_id - p.q_id).cwiseAbs().maxCoeff() == 0.0);

    const VectorXd w = random_vector(rng, c.n_s);
    const auto full = realized_schedules(p, avg, w);
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
        const auto part = realized_schedules(p, avg, alpha * w);
        const VectorXd lerp_da = p.q_da + alpha * (full.e_da - p.q_da);
        CHECK((part.e_da - lerp_da).cwiseAbs().maxCoeff() < 1e-12);
        const VectorXd lerp_id = p.q_id + alpha * (full.e_id - p.q_id);
        CHECK((part.e_id - lerp_id).cwiseAbs().maxCoeff() < 1e-12);
    }

    AffinePolicy fixed = p;
    fixed.Q_da = SparseMatrix(c.n_da, c.n_da);
    fixed.Q_id = SparseMatrix(c.n_id, c.n_id);
    CHECK((realized_schedules(fixed, avg, w).e_id - p.q_id).cwiseAbs().maxCoeff() == 0.0);

    VectorXd bad = w;
    bad[3] = 1.5;
    CHECK_THROWS_AS(realized_schedules(p, avg, bad), std::out_of_range);
    CHECK_THROWS_AS(realized_schedules(p, avg, VectorXd::Zero(c.n_s - 1)), std::invalid_argument);
}
