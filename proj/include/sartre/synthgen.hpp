#pragma once

// Observational data from additive noise models X_i = f_i(X_pa(i)) + eps_i.

#include "sartre/graph.hpp"
#include "sartre/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sartre {

/// n x d observation matrix; column j holds the samples of variable j.
class Dataset {
public:
    Dataset() = default;
    /// Throws InvalidArgument if any entry is non-finite.
    explicit Dataset(Eigen::MatrixXd values);

    std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    auto column(Var j) const { return values_.col(static_cast<Eigen::Index>(j)); }

    /// Dataset restricted to the given columns, in the given order.
    Dataset select_columns(const std::vector<Var>& cols) const;
    Dataset select_rows(const std::vector<std::size_t>& rows) const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    Eigen::MatrixXd values_;
};

enum class LinkKind { GpNonlinear, Linear };

struct AnmSpec {
    Dag dag;
    std::vector<LinkKind> link;
    std::vector<double> noise_std;
    double gp_bandwidth = 1.0;
    Seed seed = 0;

    /// Throws InvalidArgument when sizes disagree with the DAG or a scale is not positive.
    void validate() const;
};

/// Range noise standard deviations are drawn from.
struct NoiseRange {
    double lo = 0.4;
    double hi = 0.8;
};

/// All links GP-nonlinear, noise scales drawn uniformly from `noise`.
AnmSpec make_nonlinear_spec(const Dag& dag, Seed seed, NoiseRange noise = {});

/// Each non-root node is linear with probability p_linear, else GP-nonlinear.
AnmSpec make_mixed_spec(const Dag& dag, double p_linear, Seed seed, NoiseRange noise = {});

/// Draws n samples. Every node uses its own random stream derived from
/// spec.seed, so a node's values depend only on its parents' values.
/// Throws NumericalFailure if the jittered GP kernel cannot be factorized.
Dataset sample_anm(const AnmSpec& spec, std::size_t n);

/// One joint draw of a zero-mean GP with RBF kernel at the rows of `inputs`.
Eigen::VectorXd sample_gp(const Eigen::MatrixXd& inputs, double bandwidth, Rng& rng);

}  // namespace sartre
