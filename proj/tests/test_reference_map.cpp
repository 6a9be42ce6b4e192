#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sfrbid/reference_map.hpp"

using namespace sfrbid;

namespace {

Timescales short_horizon(Seconds horizon) {
    Timescales ts = Timescales::swiss();
    ts.horizon = ts.reserve_period = horizon;
    ts.day_ahead = std::min<Seconds>(ts.day_ahead, horizon);
    ts.day_aligned = false;
    return ts;
}

VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

// Case table for T_ID = 15 min, T_S = 5 min, T_RP = 10 min, written out directly:
// boundary breakpoints take the mean of the neighbouring plateaus, all others
// the plateau of their own slot.
VectorXd case_table(const VectorXd& e, double t_id_h) {
    const Eigen::Index n_id = e.size();
    const Eigen::Index n_s = 3 * n_id;
    VectorXd p(n_s + 1);
    for (Eigen::Index s = 0; s <= n_s; ++s) {
        if (s == 0) p[s] = e[0] / t_id_h;
        else if (s == n_s) p[s] = e[n_id - 1] / t_id_h;
        else if (s % 3 == 0) p[s] = (e[s / 3 - 1] + e[s / 3]) / (2.0 * t_id_h);
        else p[s] = e[s / 3] / t_id_h;
    }
    return p;
}

// Integral of the piecewise-affine interpolant over each slot, summed on a 1 s grid.
VectorXd quadrature_energy(const VectorXd& bp, Seconds step, Seconds slot, bool stepwise) {
    const Eigen::Index n_s = bp.size() - 1;
    const Seconds horizon = n_s * step;
    VectorXd e = VectorXd::Zero(horizon / slot);
    for (Seconds t = 0; t < horizon; ++t) {
        const double mid = static_cast<double>(t) + 0.5;
        const auto s = static_cast<Eigen::Index>(t / step);
        const double frac = (mid - static_cast<double>(s * step)) / static_cast<double>(step);
        const double v = stepwise ? bp[s] : bp[s] + frac * (bp[s + 1] - bp[s]);
        e[t / slot] += v / 3600.0;
    }
    return e;
}

}  // namespace

TEST_CASE("M spreads each day-ahead hour over its quarter hours") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const MatrixXd M = MatrixXd(build_M(c, ts));
    REQUIRE(M.rows() == 96);
    REQUIRE(M.cols() == 24);
    for (Eigen::Index k = 0; k < 96; ++k)
        for (Eigen::Index j = 0; j < 24; ++j) CHECK(M(k, j) == (j == k / 4 ? 0.25 : 0.0));
    for (Eigen::Index j = 0; j < 24; ++j) CHECK(M.col(j).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("M is the identity when both markets share the slot length") {
    Timescales ts = Timescales::swiss_with_horizon(kDay);
    ts.day_ahead = ts.intraday;
    const auto c = derive_counts(ts);
    const MatrixXd M = MatrixXd(build_M(c, ts));
    CHECK(M.isApprox(MatrixXd::Identity(c.n_id, c.n_id)));
}

TEST_CASE("two-slot reference with a centred ramp") {
    const Timescales ts = short_horizon(30 * kMinute);
    const auto c = derive_counts(ts);
    REQUIRE(c.n_s == 6);
    const SparseMatrix R = build_R(ts, c);
    VectorXd e(2);
    e << 1.0, 2.0;
    const ReferenceProfile p = reference_from_baseline(e, R, ts);
    VectorXd expected(7);
    expected << 4, 4, 4, 6, 8, 8, 8;
    CHECK((p.breakpoints - expected).cwiseAbs().maxCoeff() < 1e-12);
    // midpoints of the 4->6 and 6->8 ramp segments
    CHECK(eval_reference(p, 12.5 * 60.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(eval_reference(p, 17.5 * 60.0) == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(eval_reference(p, 15.0 * 60.0) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(eval_reference(p, 0.0) == doctest::Approx(4.0));
    CHECK(eval_reference(p, 1800.0) == doctest::Approx(8.0));
    CHECK_THROWS_AS(eval_reference(p, 1800.5), std::out_of_range);
    CHECK_THROWS_AS(eval_reference(p, -0.5), std::out_of_range);
}

TEST_CASE("uniform and zero baselines give flat references") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const SparseMatrix R = build_R(ts, c);
    const ReferenceProfile flat = reference_from_baseline(VectorXd::Constant(c.n_id, 0.7), R, ts);
    CHECK((flat.breakpoints.array() - 0.7 / 0.25).abs().maxCoeff() < 1e-12);
    CHECK((flat.energy.array() - 0.7).abs().maxCoeff() < 1e-12);
    const ReferenceProfile zero = reference_from_baseline(VectorXd::Zero(c.n_id), R, ts);
    CHECK(zero.breakpoints.isZero(0.0));
}

TEST_CASE("R matches the explicit case table for random baselines") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const SparseMatrix R = build_R(ts, c);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const VectorXd e = random_vector(rng, c.n_id, -2.0, 2.0);
        const VectorXd p = R * e;
        CHECK((p - case_table(e, 0.25)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("R rows: at most two entries, one on plateaus, each summing to 1/T_ID") {
    for (Seconds ramp : {Seconds{0}, 5 * kMinute, 10 * kMinute, 15 * kMinute}) {
        Timescales ts = Timescales::swiss_with_horizon(kDay);
        ts.ramp = ramp;
        const auto c = derive_counts(ts);
        const SparseMatrix R = build_R(ts, c);
        for (Eigen::Index s = 0; s < R.rows(); ++s) {
            int nnz = 0;
            double sum = 0.0;
            for (SparseMatrix::InnerIterator it(R, s); it; ++it) {
                ++nnz;
                sum += it.value();
            }
            CHECK(nnz >= 1);
            CHECK(nnz <= 2);
            CHECK(sum == doctest::Approx(4.0).epsilon(1e-14));
            const Seconds t = s * ts.system;
            const Seconds to_boundary = std::abs(t - ((t + ts.intraday / 2) / ts.intraday) * ts.intraday);
            if (2 * to_boundary >= ramp || t == 0 || t == ts.horizon) CHECK(nnz == 1);
        }
    }
}

TEST_CASE("interior slots carry (e_{k-1} + 10 e_k + e_{k+1}) / 12") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const SparseMatrix R = build_R(ts, c);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const VectorXd e = random_vector(rng, c.n_id, -3.0, 3.0);
        const ReferenceProfile p = reference_from_baseline(e, R, ts);
        for (Eigen::Index k = 1; k + 1 < c.n_id; ++k)
            CHECK(std::abs(p.energy[k] - (e[k - 1] + 10.0 * e[k] + e[k + 1]) / 12.0) < 1e-12);
    }
}

TEST_CASE("energy content agrees with fine-grid quadrature") {
    std::mt19937_64 rng(9);
    for (Seconds ramp : {Seconds{0}, 5 * kMinute, 10 * kMinute}) {
        Timescales ts = Timescales::swiss_with_horizon(kDay);
        ts.ramp = ramp;
        const auto c = derive_counts(ts);
        const VectorXd e = random_vector(rng, c.n_id, -1.0, 4.0);
        const ReferenceProfile p = reference_from_baseline(e, build_R(ts, c), ts);
        const VectorXd q = quadrature_energy(p.breakpoints, ts.system, ts.intraday, p.stepwise);
        CHECK((p.energy - q).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("total energy is conserved for random baselines") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const SparseMatrix R = build_R(ts, c);
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const VectorXd e = random_vector(rng, c.n_id, -5.0, 5.0);
        const ReferenceProfile p = reference_from_baseline(e, R, ts);
        CHECK(std::abs(p.energy.sum() - e.sum()) <= 1e-12 * std::max(1.0, e.cwiseAbs().sum()));
    }
}

TEST_CASE("zero ramp duration gives the piecewise-constant reference") {
    Timescales ts = Timescales::swiss_with_horizon(kDay);
    ts.ramp = 0;
    const auto c = derive_counts(ts);
    std::mt19937_64 rng(17);
    const VectorXd e = random_vector(rng, c.n_id, -2.0, 2.0);
    const ReferenceProfile p = reference_from_baseline(e, build_R(ts, c), ts);
    CHECK(p.stepwise);
    CHECK((p.energy - e).cwiseAbs().maxCoeff() == 0.0);
    for (Seconds t = 0; t < ts.horizon; t += 97)
        CHECK(eval_reference(p, static_cast<double>(t)) == e[t / ts.intraday] / 0.25);
}

TEST_CASE("baseline combines day-ahead and intra-day trades") {
    const Timescales ts = Timescales::swiss_with_horizon(kDay);
    const auto c = derive_counts(ts);
    const SparseMatrix M = build_M(c, ts);
    std::mt19937_64 rng(19);
    const VectorXd e_da = random_vector(rng, c.n_da, 0.0, 4.0);
    const VectorXd e_id = random_vector(rng, c.n_id, -1.0, 1.0);
    const auto b = BaselineSchedule::from_trades(e_da, e_id, M);
    for (Eigen::Index k = 0; k < c.n_id; ++k) CHECK(b.e_base[k] == doctest::Approx(e_da[k / 4] / 4.0 + e_id[k]));
    CHECK_THROWS_AS(BaselineSchedule::from_trades(e_id, e_da, M), std::invalid_argument);
}
