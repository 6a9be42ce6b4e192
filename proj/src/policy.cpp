#include "sfrbid/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sfrbid {

Mask::Mask(std::int64_t rows, std::int64_t cols)
    : rows_(rows), cols_(cols), allowed_(static_cast<std::size_t>(rows)) {}

void Mask::allow(std::int64_t row, std::int64_t col) {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw std::out_of_range("mask entry out of range");
    auto& r = allowed_[row];
    auto it = std::lower_bound(r.begin(), r.end(), col);
    if (it == r.end() || *it != col) r.insert(it, col);
}

bool Mask::operator()(std::int64_t row, std::int64_t col) const {
    const auto& r = allowed_[row];
    return std::binary_search(r.begin(), r.end(), col);
}

std::int64_t Mask::population() const {
    std::int64_t n = 0;
    for (const auto& r : allowed_) n += static_cast<std::int64_t>(r.size());
    return n;
}

std::vector<std::pair<std::int64_t, std::int64_t>> Mask::entries() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(static_cast<std::size_t>(population()));
    for (std::int64_t r = 0; r < rows_; ++r)
        for (auto c : allowed_[r]) out.emplace_back(r, c);
    return out;
}

AffinePolicy AffinePolicy::zero(const IndexCounts& counts) {
    AffinePolicy p;
    p.Q_da = SparseMatrix(counts.n_da, counts.n_da);
    p.Q_id = SparseMatrix(counts.n_id, counts.n_id);
    p.q_da = VectorXd::Zero(counts.n_da);
    p.q_id = VectorXd::Zero(counts.n_id);
    return p;
}

namespace {

SparseMatrix block_average(std::int64_t rows, std::int64_t cols, std::int64_t width) {
    if (rows * width != cols) throw std::invalid_argument("averaging: counts do not match timescales");
    const double weight = 1.0 / static_cast<double>(width);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(cols));
    for (std::int64_t c = 0; c < cols; ++c) trips.emplace_back(c / width, c, weight);
    SparseMatrix A(rows, cols);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

}  // namespace

Averaging build_averaging(const IndexCounts& counts, const Timescales& ts) {
    return {block_average(counts.n_da, counts.n_s, ts.day_ahead / ts.system),
            block_average(counts.n_id, counts.n_s, ts.intraday / ts.system)};
}

Mask build_da_mask(const IndexCounts& counts, const Timescales& ts, std::int64_t n_da_lb) {
    if (n_da_lb < 0) throw std::invalid_argument("N_DA_lb must be non-negative");
    Mask mask(counts.n_da, counts.n_da);
    if (n_da_lb == 0) return mask;
    if (kDay % ts.day_ahead != 0)
        throw std::invalid_argument("day-ahead adjustments need T_DA to divide one day");

    const std::int64_t per_day = kDay / ts.day_ahead;
    const std::int64_t gate = ts.da_gate_offset / ts.day_ahead;  // slots observed before the gate
    const std::int64_t width = std::min(n_da_lb, per_day);

    for (std::int64_t row = per_day; row < counts.n_da; ++row) {
        const std::int64_t day = row / per_day;  // 0-based; day 0 has no adjustable rows
        const std::int64_t last = per_day * (day - 1) + gate;  // exclusive, 0-based
        for (std::int64_t col = std::max<std::int64_t>(0, last - width); col < last; ++col)
            mask.allow(row, col);
    }
    return mask;
}

Mask build_id_mask(const IndexCounts& counts, const Timescales& ts, std::int64_t n_id_lb) {
    if (n_id_lb < 0) throw std::invalid_argument("N_ID_lb must be non-negative");
    Mask mask(counts.n_id, counts.n_id);
    const std::int64_t lead = ts.intraday_lead / ts.intraday;
    for (std::int64_t k = 0; k < counts.n_id; ++k) {
        const std::int64_t hi = k - lead - 1;
        for (std::int64_t i = std::max<std::int64_t>(0, hi - n_id_lb + 1); i <= hi; ++i)
            mask.allow(k, i);
    }
    return mask;
}

PolicyStructure make_structure(const IndexCounts& counts, const Timescales& ts,
                               std::int64_t n_da_lb, std::int64_t n_id_lb) {
    return {n_da_lb, n_id_lb, build_da_mask(counts, ts, n_da_lb),
            build_id_mask(counts, ts, n_id_lb)};
}

namespace {

void check_matrix(const SparseMatrix& Q, const Mask& mask, const char* name) {
    if (Q.rows() != mask.rows() || Q.cols() != mask.cols())
        throw std::invalid_argument(std::string(name) + " has the wrong shape");
    for (int r = 0; r < Q.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(Q, r); it; ++it)
            if (it.value() != 0.0 && !mask(it.row(), it.col()))
                throw std::invalid_argument(std::string(name) + " entry (" +
                                            std::to_string(it.row() + 1) + ", " +
                                            std::to_string(it.col() + 1) +
                                            ") lies outside the policy mask");
}

}  // namespace

void check_policy(const AffinePolicy& policy, const PolicyStructure& structure) {
    check_matrix(policy.Q_da, structure.mask_da, "Q_DA");
    check_matrix(policy.Q_id, structure.mask_id, "Q_ID");
    if (policy.q_da.size() != structure.mask_da.rows() ||
        policy.q_id.size() != structure.mask_id.rows())
        throw std::invalid_argument("policy offset vectors have the wrong length");
    if (!(policy.gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
}

AffineReference reference_affine_map(const AffinePolicy& policy, const SparseMatrix& M,
                                     const SparseMatrix& R, const Averaging& avg) {
    if (M.rows() != policy.Q_id.rows() || M.cols() != policy.Q_da.rows() ||
        R.cols() != M.rows() || avg.A_da.rows() != policy.Q_da.cols() ||
        avg.A_id.rows() != policy.Q_id.cols())
        throw std::invalid_argument("reference_affine_map: dimension mismatch");
    const SparseMatrix da_part = M * policy.Q_da * avg.A_da;
    const SparseMatrix id_part = policy.Q_id * avg.A_id;
    const SparseMatrix baseline = da_part + id_part;
    const SparseMatrix theta_sparse = R * baseline;
    AffineReference out;
    out.Theta = MatrixXd(theta_sparse);
    out.theta = R * (M * policy.q_da + policy.q_id);
    return out;
}

RealizedSchedules realized_schedules(const AffinePolicy& policy, const Averaging& avg,
                                     const VectorXd& w_avg) {
    if (w_avg.size() != avg.A_id.cols())
        throw std::invalid_argument("averaged activation has the wrong length");
    for (Eigen::Index i = 0; i < w_avg.size(); ++i)
        if (!(std::abs(w_avg[i]) <= 1.0 + 1e-12))
            throw std::out_of_range("averaged activation entry " + std::to_string(i + 1) +
                                    " outside [-1, 1]");
    return {policy.Q_da * (avg.A_da * w_avg) + policy.q_da,
            policy.Q_id * (avg.A_id * w_avg) + policy.q_id};
}

}  // namespace sfrbid
