#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sfrbid/market_time.hpp"
#include "sfrbid/reference_map.hpp"

namespace sfrbid {

/// Sparsity pattern of a policy matrix: for every row, the sorted list of
/// columns whose entry may be nonzero.
class Mask {
public:
    Mask() = default;
    Mask(std::int64_t rows, std::int64_t cols);

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }

    void allow(std::int64_t row, std::int64_t col);
    bool operator()(std::int64_t row, std::int64_t col) const;
    const std::vector<std::int64_t>& row(std::int64_t r) const { return allowed_[r]; }

    std::int64_t population() const;
    /// (row, col) pairs in row-major scan order.
    std::vector<std::pair<std::int64_t, std::int64_t>> entries() const;

    bool operator==(const Mask& other) const = default;

private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::vector<std::vector<std::int64_t>> allowed_;
};

struct PolicyStructure {
    std::int64_t n_da_lb = 0;  // day-ahead lookback, in T_DA slots
    std::int64_t n_id_lb = 0;  // intra-day lookback, in T_ID slots
    Mask mask_da;              // N_DA x N_DA
    Mask mask_id;              // N_ID x N_ID
};

/// Decision variables of the bidding problem: affine trading policies and the
/// symmetric reserve capacity.
struct AffinePolicy {
    SparseMatrix Q_da;  // N_DA x N_DA, kWh per unit of averaged activation
    VectorXd q_da;      // kWh
    SparseMatrix Q_id;  // N_ID x N_ID
    VectorXd q_id;      // kWh
    double gamma = 0.0;  // kW

    static AffinePolicy zero(const IndexCounts& counts);
};

struct Averaging {
    SparseMatrix A_da;  // N_DA x N_S
    SparseMatrix A_id;  // N_ID x N_S
};

Averaging build_averaging(const IndexCounts& counts, const Timescales& ts);

/// Day-ahead mask. Day 1 is traded before the horizon starts and cannot react
/// to activation. Day d >= 2 may use the last min(N_DA_lb, slots per day)
/// day-ahead slots fully observed at that day's gate closure.
Mask build_da_mask(const IndexCounts& counts, const Timescales& ts, std::int64_t n_da_lb);

/// Intra-day mask: row k may use slots i with k-L-N_ID_lb <= i <= k-L-1,
/// where L = T_ID_lead / T_ID.
Mask build_id_mask(const IndexCounts& counts, const Timescales& ts, std::int64_t n_id_lb);

PolicyStructure make_structure(const IndexCounts& counts, const Timescales& ts,
                               std::int64_t n_da_lb, std::int64_t n_id_lb);

/// Throws std::invalid_argument if the policy has the wrong shape, a negative
/// gamma, or a nonzero entry outside its mask.
void check_policy(const AffinePolicy& policy, const PolicyStructure& structure);

/// p_ref(w~) = Theta w~ + theta.
struct AffineReference {
    MatrixXd Theta;  // (N_S + 1) x N_S
    VectorXd theta;  // N_S + 1
};

AffineReference reference_affine_map(const AffinePolicy& policy, const SparseMatrix& M,
                                     const SparseMatrix& R, const Averaging& avg);

struct RealizedSchedules {
    VectorXd e_da;
    VectorXd e_id;
};

/// Trades produced by the policies for an averaged activation in [-1, 1]^N_S.
RealizedSchedules realized_schedules(const AffinePolicy& policy, const Averaging& avg,
                                     const VectorXd& w_avg);

}  // namespace sfrbid
