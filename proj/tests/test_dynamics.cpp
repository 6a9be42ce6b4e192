#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "sfrbid/dynamics.hpp"

using namespace sfrbid;

namespace {

// Composite Simpson rule in long double; plenty for smooth exponentials.
double simpson(const std::function<long double(long double)>& f, long double lo, long double hi,
               int n = 20000) {
    const long double h = (hi - lo) / n;
    long double sum = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) sum += f(lo + i * h) * ((i % 2) ? 4.0L : 2.0L);
    return static_cast<double>(sum * h / 3.0L);
}

struct Reference {
    double f, g, h1, h2, full;
};

Reference by_quadrature(double a, double b, double c, double T) {
    const long double al = a;
    const double int_exp = simpson([&](long double t) { return std::exp(al * t); }, 0.0L, T);
    const double int_tau = simpson([&](long double t) { return std::exp(al * t) * t; }, 0.0L, T);
    const double int_rest = simpson([&](long double t) { return std::exp(al * t) * (T - t); }, 0.0L, T);
    return {std::exp(a * T), b * int_exp, c / T * int_tau, c / T * int_rest, c * int_exp};
}

bool rel_close(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max(std::abs(y), 1e-300);
}

}  // namespace

TEST_CASE("ideal battery coefficients") {
    for (double T : {1.0 / 60.0, 5.0 / 60.0, 0.25, 1.0}) {
        const auto k = discretize(0.0, 1.0, 1.0, T);
        CHECK(k.f == 1.0);
        CHECK(k.g == T);
        CHECK(k.h1 == T / 2.0);
        CHECK(k.h2 == T / 2.0);
    }
    const auto k = discretize(0.0, 0.0, 1.0, 5.0 / 60.0);
    CHECK(k.g == 0.0);
}

TEST_CASE("coefficients match quadrature of the defining integrals") {
    for (double a : {-1e-3, -0.01, -0.1, -1.0, -5.0, -20.0})
        for (double T : {1.0 / 60.0, 5.0 / 60.0, 0.25, 1.0}) {
            CAPTURE(a);
            CAPTURE(T);
            const auto k = discretize(a, 0.7, 0.9, T);
            const auto q = by_quadrature(a, 0.7, 0.9, T);
            CHECK(rel_close(k.f, q.f, 1e-14));
            CHECK(rel_close(k.g, q.g, 1e-10));
            CHECK(rel_close(k.h1, q.h1, 1e-10));
            CHECK(rel_close(k.h2, q.h2, 1e-10));
            CHECK(rel_close(k.h1 + k.h2, q.full, 1e-10));
            CHECK(rel_close(activation_integral_bounds(a, 0.9, T).full, q.full, 1e-10));
        }
}

TEST_CASE("series and closed forms agree near a = 0") {
    const double T = 5.0 / 60.0;
    for (double z : {1e-9, 1e-7, 1e-6, 1e-5, 9.9e-6, 1.01e-5, 1e-3, 0.0999, 0.1001, 0.5}) {
        CAPTURE(z);
        const double a = -z / T;
        const auto k = discretize(a, 1.0, 1.0, T);
        const auto q = by_quadrature(a, 1.0, 1.0, T);
        CHECK(rel_close(k.g, q.g, 1e-10));
        CHECK(rel_close(k.h1, q.h1, 1e-10));
        CHECK(rel_close(k.h2, q.h2, 1e-10));
    }
    // continuity into the a = 0 branch
    const auto k0 = discretize(0.0, 1.0, 1.0, T);
    const auto k1 = discretize(-1e-6 / T, 1.0, 1.0, T);
    CHECK(std::abs(k1.g - k0.g) <= 1e-6 * T);
    CHECK(std::abs(k1.h1 - k0.h1) <= 1e-6 * T);
    CHECK(std::abs(k1.h2 - k0.h2) <= 1e-6 * T);
}

TEST_CASE("midpoint constant bounds the exponential on the whole step") {
    for (double a : {0.0, -0.01, -0.1, -1.0, -10.0})
        for (double T : {5.0 / 60.0, 1.0}) {
            const auto eb = epsilon_bound(a, T);
            CHECK(eb.eps == doctest::Approx((1.0 - std::exp(a * T)) / 2.0).epsilon(1e-13));
            CHECK(eb.e_a_tau_hat == doctest::Approx((1.0 + std::exp(a * T)) / 2.0).epsilon(1e-14));
            double worst = 0.0;
            for (int i = 0; i <= 100000; ++i) {
                const double tau = T * i / 100000.0;
                worst = std::max(worst, std::abs(std::exp(a * tau) - eb.e_a_tau_hat));
            }
            CHECK(worst <= eb.eps + 1e-12);
            CHECK(worst >= eb.eps - 1e-12);  // tight at the endpoints
            if (a < 0.0) CHECK(eb.eps < 1.0 - std::exp(a * T));
        }
    const auto zero = epsilon_bound(0.0, 0.25);
    CHECK(zero.eps == 0.0);
    CHECK(zero.e_a_tau_hat == 1.0);
}

TEST_CASE("activation integral coefficients") {
    const auto ideal = activation_integral_bounds(0.0, 0.95, 5.0 / 60.0);
    CHECK(ideal.nominal == doctest::Approx(0.95 * 5.0 / 60.0).epsilon(1e-15));
    CHECK(ideal.slack == 0.0);
    CHECK(ideal.full == doctest::Approx(ideal.nominal).epsilon(1e-15));
    const auto lossy = activation_integral_bounds(-0.5, 1.0, 0.25);
    // nominal - slack <= full <= nominal + slack, since e^{a tau} lies within eps of the midpoint
    CHECK(lossy.full <= lossy.nominal + lossy.slack + 1e-15);
    CHECK(lossy.full >= lossy.nominal - lossy.slack - 1e-15);
}

TEST_CASE("state matrices reproduce the step recursion") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const StepCoefficients k{0.5 + 0.5 * std::abs(U(rng)), U(rng), U(rng), U(rng)};
        const std::int64_t n = 6;
        const auto m = build_state_matrices(k, n);
        Eigen::VectorXd u(n), p(n + 1), v(n);
        for (auto* vec : {&u, &p, &v})
            for (Eigen::Index i = 0; i < vec->size(); ++i) (*vec)[i] = U(rng);
        const double x0 = U(rng), gamma = std::abs(U(rng));
        const Eigen::VectorXd x = m.F * x0 + m.G * u + m.H * p + gamma * m.K * v;
        double xs = x0;
        for (std::int64_t s = 1; s <= n; ++s) {
            xs = k.f * xs + k.g * u[s - 1] + k.h1 * p[s - 1] + k.h2 * p[s] + gamma * v[s - 1];
            CHECK(std::abs(x[s - 1] - xs) <= 1e-12);
        }
        // K is lower triangular with powers of f
        for (std::int64_t s = 0; s < n; ++s)
            for (std::int64_t i = 0; i < n; ++i)
                CHECK(m.K(s, i) == doctest::Approx(i <= s ? std::pow(k.f, s - i) : 0.0).epsilon(1e-14));
    }
}

TEST_CASE("ideal battery matrices") {
    const auto m = build_state_matrices(discretize(0.0, 0.0, 1.0, 0.5), 5);
    for (int s = 0; s < 5; ++s) {
        CHECK(m.F[s] == 1.0);
        for (int i = 0; i < 5; ++i) CHECK(m.K(s, i) == (i <= s ? 1.0 : 0.0));
        // H row s only touches breakpoints 0..s+1
        for (int j = s + 2; j <= 5; ++j) CHECK(m.H(s, j) == 0.0);
    }
    const auto one = build_state_matrices(discretize(0.0, 0.0, 1.0, 0.5), 1);
    CHECK(one.H(0, 0) == 0.25);
    CHECK(one.H(0, 1) == 0.25);
}

TEST_CASE("constant power integrates linearly when a = 0") {
    const double T = 5.0 / 60.0;
    const auto m = build_state_matrices(discretize(0.0, 0.0, 0.9, T), 50);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(51, 3.0);
    const Eigen::VectorXd x = m.F * 2.0 + m.H * p;
    for (int s = 1; s <= 50; ++s) CHECK(x[s - 1] == doctest::Approx(2.0 + 0.9 * 3.0 * s * T).epsilon(1e-13));
}

TEST_CASE("system parameter validation") {
    const double inf = std::numeric_limits<double>::infinity();
    auto ok = SystemParams::constant(4, -5, 5, -inf, inf, 0, 15, 7.5, 7.5);
    CHECK_NOTHROW(ok.validate(4));
    CHECK_THROWS_AS(ok.validate(5), std::invalid_argument);
    auto bad = ok;
    bad.a = 0.1;
    CHECK_THROWS_AS(bad.validate(4), std::invalid_argument);
    bad = ok;
    bad.c = -1.0;
    CHECK_THROWS_AS(bad.validate(4), std::invalid_argument);
    bad = ok;
    bad.x0_min = 16.0;
    bad.x0_max = 16.0;
    CHECK_THROWS_AS(bad.validate(4), std::invalid_argument);
    bad = ok;
    bad.r_lo[2] = 1.0;
    CHECK_THROWS_AS(bad.validate(4), std::invalid_argument);
    bad = ok;
    bad.p_lo[1] = 6.0;
    CHECK_THROWS_AS(bad.validate(4), std::invalid_argument);
    CHECK_THROWS_AS(discretize(0.1, 1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(discretize(-0.1, 1, 1, 0), std::invalid_argument);
}
