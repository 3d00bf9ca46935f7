#include "sartre/embed.hpp"

#include "sartre/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace sartre {

void TreeConfig::validate() const {
    if (num_trees == 0) throw InvalidArgument("num_trees must be positive");
    if (max_leaves == 0) throw InvalidArgument("max_leaves must be positive");
    if (min_samples_leaf == 0) throw InvalidArgument("min_samples_leaf must be positive");
}

IntervalSet::IntervalSet(Var var, std::vector<Interval> intervals, const std::vector<std::size_t>& tree_sizes)
    : var_(var), intervals_(std::move(intervals)) {
    offsets_.push_back(0);
    for (std::size_t size : tree_sizes) {
        if (size == 0) throw InvalidArgument("tree with no leaves");
        offsets_.push_back(offsets_.back() + size);
    }
    if (offsets_.back() != intervals_.size()) {
        throw InvalidArgument("tree sizes do not add up to the interval count");
    }
    for (std::size_t t = 0; t + 1 < offsets_.size(); ++t) {
        const auto group = tree(t);
        if (group.front().lo != -kInf || group.back().hi != kInf) {
            throw InvalidArgument("tree " + std::to_string(t) + " does not cover the real line");
        }
        std::vector<double> cuts;
        for (std::size_t k = 0; k < group.size(); ++k) {
            if (!(group[k].lo < group[k].hi)) throw InvalidArgument("empty interval in tree " + std::to_string(t));
            if (k + 1 < group.size()) {
                if (group[k].hi != group[k + 1].lo) {
                    throw InvalidArgument("intervals of tree " + std::to_string(t) + " are not contiguous");
                }
                cuts.push_back(group[k].hi);
            }
        }
        cuts_.push_back(std::move(cuts));
    }
}

std::span<const Interval> IntervalSet::tree(std::size_t t) const {
    return {intervals_.data() + offsets_.at(t), offsets_.at(t + 1) - offsets_.at(t)};
}

std::size_t IntervalSet::leaf_of(std::size_t t, double x) const {
    const auto& cuts = cuts_.at(t);
    // First cut >= x closes the interval containing x.
    const auto it = std::lower_bound(cuts.begin(), cuts.end(), x);
    return offsets_[t] + static_cast<std::size_t>(it - cuts.begin());
}

namespace {

struct Node {
    std::size_t begin;
    std::size_t end;
    double lo;
    double hi;
    bool splittable = true;

    std::size_t count() const { return end - begin; }
};

constexpr int kSplitAttempts = 8;

std::vector<Interval> grow_tree(const std::vector<double>& sorted, const TreeConfig& cfg, Rng& rng) {
    std::vector<Node> leaves{{0, sorted.size(), -kInf, kInf}};
    const std::size_t min_leaf = cfg.min_samples_leaf;

    while (leaves.size() < cfg.max_leaves) {
        // Largest splittable node; ties go to the leftmost.
        std::size_t pick = leaves.size();
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            if (leaves[k].splittable && (pick == leaves.size() || leaves[k].count() > leaves[pick].count())) {
                pick = k;
            }
        }
        if (pick == leaves.size()) break;

        Node& node = leaves[pick];
        const double vmin = sorted[node.begin];
        const double vmax = sorted[node.end - 1];
        if (node.count() < 2 * min_leaf || !(vmin < vmax)) {
            node.splittable = false;
            continue;
        }
        std::uniform_real_distribution<double> draw(vmin, vmax);
        bool split = false;
        for (int attempt = 0; attempt < kSplitAttempts && !split; ++attempt) {
            const double cut = draw(rng);
            if (!(cut < vmax)) continue;
            const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(node.begin);
            const auto last = sorted.begin() + static_cast<std::ptrdiff_t>(node.end);
            const auto mid = static_cast<std::size_t>(std::upper_bound(first, last, cut) - sorted.begin());
            if (mid - node.begin < min_leaf || node.end - mid < min_leaf) continue;
            Node right{mid, node.end, cut, node.hi};
            node.end = mid;
            node.hi = cut;
            leaves.push_back(right);
            split = true;
        }
        if (!split) leaves[pick].splittable = false;
    }

    std::sort(leaves.begin(), leaves.end(), [](const Node& a, const Node& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    out.reserve(leaves.size());
    for (const Node& leaf : leaves) out.push_back({leaf.lo, leaf.hi});
    return out;
}

}  // namespace

IntervalSet fit_randomized_trees(std::span<const double> column, const TreeConfig& cfg, Var var) {
    cfg.validate();
    if (column.empty()) throw InvalidArgument("cannot fit trees on an empty column");
    std::vector<double> sorted(column.begin(), column.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) throw InvalidArgument("column contains non-finite values");
    }
    std::sort(sorted.begin(), sorted.end());

    Rng rng(cfg.seed);
    std::vector<Interval> intervals;
    std::vector<std::size_t> sizes;
    for (std::size_t t = 0; t < cfg.num_trees; ++t) {
        auto leaves = grow_tree(sorted, cfg, rng);
        sizes.push_back(leaves.size());
        intervals.insert(intervals.end(), leaves.begin(), leaves.end());
    }
    return IntervalSet(var, std::move(intervals), sizes);
}

std::vector<IntervalSet> fit_all_trees(const Dataset& data, const TreeConfig& cfg) {
    std::vector<IntervalSet> out;
    out.reserve(data.d());
    for (Var j = 0; j < data.d(); ++j) {
        TreeConfig local = cfg;
        local.seed = derive_seed(cfg.seed, j);
        const auto col = data.column(j);
        out.push_back(fit_randomized_trees(std::span<const double>(col.data(), data.n()), local, j));
    }
    return out;
}

std::vector<std::uint8_t> embed(double x, const IntervalSet& rset) {
    std::vector<std::uint8_t> bits(rset.size(), 0);
    for (std::size_t t = 0; t < rset.num_trees(); ++t) bits[rset.leaf_of(t, x)] = 1;
    return bits;
}

IndicatorMatrix::IndicatorMatrix(std::size_t rows, std::size_t cols, std::size_t ones_per_row)
    : rows_(rows), cols_(cols), per_row_(ones_per_row), active_(rows * ones_per_row, 0) {}

Eigen::MatrixXd IndicatorMatrix::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t m = 0; m < rows_; ++m) {
        for (std::uint32_t c : row(m)) out(static_cast<Eigen::Index>(m), c) = 1.0;
    }
    return out;
}

IndicatorMatrix embed_column(std::span<const double> column, const IntervalSet& rset) {
    IndicatorMatrix out(column.size(), rset.size(), rset.num_trees());
    for (std::size_t m = 0; m < column.size(); ++m) {
        auto row = out.row(m);
        for (std::size_t t = 0; t < rset.num_trees(); ++t) {
            row[t] = static_cast<std::uint32_t>(rset.leaf_of(t, column[m]));
        }
    }
    return out;
}

std::vector<IndicatorMatrix> embed_dataset(const Dataset& data, const std::vector<IntervalSet>& rsets) {
    if (rsets.size() != data.d()) {
        throw DimensionMismatch("expected " + std::to_string(data.d()) + " interval sets, got " +
                                std::to_string(rsets.size()));
    }
    std::vector<IndicatorMatrix> out;
    out.reserve(data.d());
    for (Var j = 0; j < data.d(); ++j) {
        const auto col = data.column(j);
        out.push_back(embed_column(std::span<const double>(col.data(), data.n()), rsets[j]));
    }
    return out;
}

}  // namespace sartre
