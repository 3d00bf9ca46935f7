#pragma once

// Completely randomized single-variable tree ensembles. Each leaf of each
// tree is a half-open interval (lo, hi]; a value embeds as the binary vector
// of leaf memberships across the ensemble.

#include "sartre/graph.hpp"
#include "sartre/rng.hpp"
#include "sartre/synthgen.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace sartre {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// (lo, hi]; lo may be -inf and hi may be +inf.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    bool contains(double x) const noexcept { return lo < x && x <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

struct TreeConfig {
    std::size_t num_trees = 5;
    std::size_t max_leaves = 8;
    std::size_t min_samples_leaf = 2;
    Seed seed = 0;

    void validate() const;
};

/// Intervals of one variable, grouped by tree. Within a tree the intervals
/// are sorted and partition (-inf, +inf].
class IntervalSet {
public:
    IntervalSet() = default;
    /// `tree_sizes[t]` consecutive intervals belong to tree t. Throws
    /// InvalidArgument unless every group partitions the real line.
    IntervalSet(Var var, std::vector<Interval> intervals, const std::vector<std::size_t>& tree_sizes);

    Var var() const noexcept { return var_; }
    std::size_t size() const noexcept { return intervals_.size(); }
    std::size_t num_trees() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    std::span<const Interval> tree(std::size_t t) const;
    std::size_t tree_offset(std::size_t t) const { return offsets_.at(t); }

    /// Global index of the interval of tree t containing x.
    std::size_t leaf_of(std::size_t t, double x) const;

    friend bool operator==(const IntervalSet& a, const IntervalSet& b) {
        return a.var_ == b.var_ && a.intervals_ == b.intervals_ && a.offsets_ == b.offsets_;
    }

private:
    Var var_ = 0;
    std::vector<Interval> intervals_;
    std::vector<std::size_t> offsets_;
    // Split points of each tree, i.e. the upper bounds of all but the last leaf.
    std::vector<std::vector<double>> cuts_;
};

IntervalSet fit_randomized_trees(std::span<const double> column, const TreeConfig& cfg, Var var = 0);

/// Fits one ensemble per column with per-variable seeds derived from cfg.seed.
std::vector<IntervalSet> fit_all_trees(const Dataset& data, const TreeConfig& cfg);

/// Binary embedding: bit k set iff x lies in interval k.
std::vector<std::uint8_t> embed(double x, const IntervalSet& rset);

/// n x cols binary matrix with the same number of ones in every row, stored
/// as the column indices of those ones.
class IndicatorMatrix {
public:
    IndicatorMatrix() = default;
    IndicatorMatrix(std::size_t rows, std::size_t cols, std::size_t ones_per_row);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t ones_per_row() const noexcept { return per_row_; }

    std::span<const std::uint32_t> row(std::size_t m) const {
        return {active_.data() + m * per_row_, per_row_};
    }
    std::span<std::uint32_t> row(std::size_t m) { return {active_.data() + m * per_row_, per_row_}; }

    Eigen::MatrixXd dense() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t per_row_ = 0;
    std::vector<std::uint32_t> active_;
};

IndicatorMatrix embed_column(std::span<const double> column, const IntervalSet& rset);

/// One indicator matrix per variable. Throws DimensionMismatch unless there
/// is exactly one interval set per column.
std::vector<IndicatorMatrix> embed_dataset(const Dataset& data, const std::vector<IntervalSet>& rsets);

}  // namespace sartre
