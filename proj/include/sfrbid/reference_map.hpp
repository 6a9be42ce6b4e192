#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sfrbid/market_time.hpp"

namespace sfrbid {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Day-ahead, intra-day and combined energy trades (kWh per slot).
struct BaselineSchedule {
    VectorXd e_da;    // length N_DA
    VectorXd e_id;    // length N_ID
    VectorXd e_base;  // length N_ID, = M e_da + e_id

    static BaselineSchedule from_trades(const VectorXd& e_da, const VectorXd& e_id,
                                        const SparseMatrix& M);
};

/// Continuous power reference given by its breakpoints on the T_S grid.
///
/// With a positive ramp duration the reference is the piece-wise affine
/// interpolant of `breakpoints`. With T_RP = 0 it is piece-wise constant per
/// intra-day slot; breakpoint s then holds the value on [sT_S, (s+1)T_S) and the
/// last breakpoint repeats the final plateau.
struct ReferenceProfile {
    VectorXd breakpoints;  // kW, length N_S + 1
    VectorXd energy;       // kWh per intra-day slot, length N_ID
    Seconds step = 0;      // T_S
    bool stepwise = false;
};

/// N_ID x N_DA map distributing each day-ahead trade over its intra-day slots.
SparseMatrix build_M(const IndexCounts& counts, const Timescales& ts);

/// (N_S + 1) x N_ID map from intra-day energy to power breakpoints. Plateaus
/// sit at e_k / T_ID; ramps of width T_RP are centred on every interior
/// intra-day boundary.
SparseMatrix build_R(const Timescales& ts, const IndexCounts& counts);

ReferenceProfile reference_from_baseline(const VectorXd& e_base, const SparseMatrix& R,
                                         const Timescales& ts);

/// Per-slot integral of the reference (exact: trapezoids on the T_S grid).
VectorXd energy_content(const ReferenceProfile& p, const Timescales& ts);

/// Value of the reference at t seconds, 0 <= t <= T_H.
double eval_reference(const ReferenceProfile& p, double t_seconds);

}  // namespace sfrbid
