#pragma once

#include <Eigen/Dense>

#include "sfrbid/market_time.hpp"

namespace sfrbid {

/// Physical description of a single-buffer flexible system.
///
/// The buffer follows dx/dt = a x + b u_s + c p(t) on every T_S interval.
/// Time is measured in hours inside the dynamics (a in 1/h, x in kWh, p in kW);
/// ramp limits are in kW/s.
struct SystemParams {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;
    Eigen::VectorXd u;     // N_S
    Eigen::VectorXd p_lo;  // N_S, kW
    Eigen::VectorXd p_hi;
    Eigen::VectorXd r_lo;  // N_S, kW/s (may be -inf)
    Eigen::VectorXd r_hi;  //          (may be +inf)
    Eigen::VectorXd x_lo;  // N_S, kWh
    Eigen::VectorXd x_hi;
    double x0_min = 0.0;
    double x0_max = 0.0;

    /// Constant bounds over n_s intervals.
    static SystemParams constant(std::int64_t n_s, double p_lo, double p_hi, double r_lo,
                                 double r_hi, double x_lo, double x_hi, double x0_min,
                                 double x0_max);

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate(std::int64_t n_s) const;
};

/// Exact one-step integration coefficients of the buffer dynamics:
/// x_s = f x_{s-1} + g u_s + h1 p_{s-1} + h2 p_s + gamma v_s.
struct StepCoefficients {
    double f = 1.0;
    double g = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
};

/// Constant replacing e^{a tau} on one step, with its worst-case error.
struct EpsilonBound {
    double eps = 0.0;          // (1 - e^{aT}) / 2
    double e_a_tau_hat = 1.0;  // (1 + e^{aT}) / 2
};

/// Per-step coefficients of the activation integral v_s used in the robust
/// state bound: the nominal weight multiplies the averaged activation of the
/// step, the slack is added with a fixed sign.
struct ActivationBound {
    double nominal = 0.0;  // c e^{a tau_hat} T
    double slack = 0.0;    // c eps T
    double full = 0.0;     // c int_0^T e^{a tau} dtau, the largest |v_s|
};

/// Unrolled dynamics x = F x0 + G u + H p_ref + gamma K v.
struct StateMatrices {
    Eigen::VectorXd F;  // N_S
    Eigen::MatrixXd G;  // N_S x N_S
    Eigen::MatrixXd H;  // N_S x (N_S + 1)
    Eigen::MatrixXd K;  // N_S x N_S
};

struct DiscreteDynamics {
    StepCoefficients step;
    EpsilonBound bound;
    ActivationBound activation;
    double step_hours = 0.0;
};

/// Closed forms with a dedicated a = 0 branch and a series for tiny |a T|.
StepCoefficients discretize(double a, double b, double c, double step_hours);

EpsilonBound epsilon_bound(double a, double step_hours);

ActivationBound activation_integral_bounds(double a, double c, double step_hours);

DiscreteDynamics make_dynamics(const SystemParams& sys, const Timescales& ts);

StateMatrices build_state_matrices(const StepCoefficients& step, std::int64_t n_s);

}  // namespace sfrbid
