#pragma once

// Topological ordering by iterative leaf identification with kernel score
// matching: the variable whose diagonal score-Jacobian has the smallest
// variance is a leaf.

#include "sartre/graph.hpp"
#include "sartre/rng.hpp"
#include "sartre/synthgen.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace sartre {

struct SteinConfig {
    /// Fixed RBF bandwidth; nullopt selects the median pairwise distance.
    std::optional<double> bandwidth;
    double ridge = 1e-3;
    bool recompute_each_round = true;
    /// Row cap for the O(n^3) kernel solves; larger inputs are subsampled.
    std::size_t max_samples = 3000;
    Seed subsample_seed = 0;

    void validate() const;
};

/// Median of pairwise Euclidean distances between distinct rows.
double median_pairwise_distance(const Eigen::MatrixXd& x);

/// First-order Stein estimate of the score grad log p at every sample.
Eigen::MatrixXd stein_score(const Dataset& data, const SteinConfig& cfg);

/// Second-order Stein estimate of diag(d s_i / d x_i) at every sample.
Eigen::MatrixXd stein_hessian_diag(const Dataset& data, const SteinConfig& cfg);

/// Per-variable sample variance of the diagonal score-Jacobian estimate.
Eigen::VectorXd leaf_statistics(const Dataset& data, const SteinConfig& cfg);

/// True when estimate_order will subsample `n` rows under `cfg`.
bool ordering_subsamples(std::size_t n, const SteinConfig& cfg);

/// Removes the argmin-statistic variable (ties -> smallest index) each round
/// and places it after all remaining variables.
TopologicalOrder estimate_order(const Dataset& data, const SteinConfig& cfg);

}  // namespace sartre
