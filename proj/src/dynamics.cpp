#include "sfrbid/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfrbid {

SystemParams SystemParams::constant(std::int64_t n_s, double p_lo, double p_hi, double r_lo,
                                    double r_hi, double x_lo, double x_hi, double x0_min,
                                    double x0_max) {
    SystemParams s;
    s.u = Eigen::VectorXd::Zero(n_s);
    s.p_lo = Eigen::VectorXd::Constant(n_s, p_lo);
    s.p_hi = Eigen::VectorXd::Constant(n_s, p_hi);
    s.r_lo = Eigen::VectorXd::Constant(n_s, r_lo);
    s.r_hi = Eigen::VectorXd::Constant(n_s, r_hi);
    s.x_lo = Eigen::VectorXd::Constant(n_s, x_lo);
    s.x_hi = Eigen::VectorXd::Constant(n_s, x_hi);
    s.x0_min = x0_min;
    s.x0_max = x0_max;
    return s;
}

void SystemParams::validate(std::int64_t n_s) const {
    if (!(a <= 0.0)) throw std::invalid_argument("a must be <= 0 (self-dissipation)");
    if (!(c >= 0.0)) throw std::invalid_argument("c must be >= 0");
    if (!std::isfinite(b)) throw std::invalid_argument("b must be finite");
    const Eigen::VectorXd* vecs[] = {&u, &p_lo, &p_hi, &r_lo, &r_hi, &x_lo, &x_hi};
    const char* names[] = {"u", "p_lo", "p_hi", "r_lo", "r_hi", "x_lo", "x_hi"};
    for (std::size_t i = 0; i < std::size(vecs); ++i)
        if (vecs[i]->size() != n_s)
            throw std::invalid_argument(std::string(names[i]) + " has length " +
                                        std::to_string(vecs[i]->size()) + ", expected " +
                                        std::to_string(n_s));
    for (std::int64_t s = 0; s < n_s; ++s) {
        const std::string at = " at interval " + std::to_string(s + 1);
        if (!(p_lo[s] <= p_hi[s])) throw std::invalid_argument("p_lo > p_hi" + at);
        if (!(x_lo[s] <= x_hi[s])) throw std::invalid_argument("x_lo > x_hi" + at);
        if (!(r_lo[s] <= 0.0 && 0.0 <= r_hi[s]))
            throw std::invalid_argument("ramp limits must satisfy r_lo <= 0 <= r_hi" + at);
        if (!std::isfinite(p_lo[s]) || !std::isfinite(p_hi[s]) || !std::isfinite(x_lo[s]) ||
            !std::isfinite(x_hi[s]) || !std::isfinite(u[s]))
            throw std::invalid_argument("power, state and input bounds must be finite" + at);
    }
    if (!(x_lo[0] <= x0_min && x0_min <= x0_max && x0_max <= x_hi[0]))
        throw std::invalid_argument("initial state range must satisfy x_lo_1 <= x0_min <= x0_max <= x_hi_1");
}

namespace {

// phi1(z) = (e^z - 1) / z
double phi1(double z) {
    if (z == 0.0) return 1.0;
    if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return std::expm1(z) / z;
}

// psi(z) = (e^z (z - 1) + 1) / z^2 = sum_n z^n (n + 1) / (n + 2)!
double psi(double z) {
    if (z == 0.0) return 0.5;
    if (std::abs(z) < 0.1) {
        double sum = 0.0;
        double zn = 1.0;
        double fact = 2.0;  // (n + 2)!
        for (int n = 0; n < 16; ++n) {
            sum += zn * (n + 1) / fact;
            zn *= z;
            fact *= (n + 3);
        }
        return sum;
    }
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace

StepCoefficients discretize(double a, double b, double c, double step_hours) {
    if (!(a <= 0.0)) throw std::invalid_argument("discretize: a must be <= 0");
    if (!(step_hours > 0.0)) throw std::invalid_argument("discretize: step must be positive");
    StepCoefficients k;
    const double T = step_hours;
    if (a == 0.0) {
        k.f = 1.0;
        k.g = b * T;
        k.h1 = c * T / 2.0;
        k.h2 = c * T / 2.0;
        return k;
    }
    const double z = a * T;
    const double int_exp = T * phi1(z);        // int_0^T e^{a tau} dtau
    const double int_exp_tau = T * T * psi(z);  // int_0^T e^{a tau} tau dtau
    k.f = std::exp(z);
    k.g = b * int_exp;
    k.h1 = c / T * int_exp_tau;
    k.h2 = c / T * (T * int_exp - int_exp_tau);
    return k;
}

EpsilonBound epsilon_bound(double a, double step_hours) {
    if (!(a <= 0.0)) throw std::invalid_argument("epsilon_bound: a must be <= 0");
    const double em1 = std::expm1(a * step_hours);  // e^{aT} - 1 <= 0
    return {-em1 / 2.0, 1.0 + em1 / 2.0};
}

ActivationBound activation_integral_bounds(double a, double c, double step_hours) {
    const auto eb = epsilon_bound(a, step_hours);
    return {c * eb.e_a_tau_hat * step_hours, c * eb.eps * step_hours,
            c * step_hours * phi1(a * step_hours)};
}

DiscreteDynamics make_dynamics(const SystemParams& sys, const Timescales& ts) {
    const double T = to_hours(ts.system);
    return {discretize(sys.a, sys.b, sys.c, T), epsilon_bound(sys.a, T),
            activation_integral_bounds(sys.a, sys.c, T), T};
}

StateMatrices build_state_matrices(const StepCoefficients& step, std::int64_t n_s) {
    StateMatrices m;
    m.F = Eigen::VectorXd(n_s);
    m.G = Eigen::MatrixXd::Zero(n_s, n_s);
    m.H = Eigen::MatrixXd::Zero(n_s, n_s + 1);
    m.K = Eigen::MatrixXd::Zero(n_s, n_s);

    // Powers of f, indexed by the exponent.
    Eigen::VectorXd fp(n_s + 1);
    fp[0] = 1.0;
    for (std::int64_t e = 1; e <= n_s; ++e) fp[e] = fp[e - 1] * step.f;

    // Row s (0-based) holds x_{s+1}.
    for (std::int64_t r = 0; r < n_s; ++r) {
        const std::int64_t s = r + 1;
        m.F[r] = fp[s];
        for (std::int64_t i = 1; i <= s; ++i) {
            m.K(r, i - 1) = fp[s - i];
            m.G(r, i - 1) = fp[s - i] * step.g;
        }
        for (std::int64_t j = 0; j <= s; ++j) {
            double v = 0.0;
            if (j <= s - 1) v += fp[s - 1 - j] * step.h1;
            if (j >= 1) v += fp[s - j] * step.h2;
            m.H(r, j) = v;
        }
    }
    return m;
}

}  // namespace sfrbid
