#pragma once

// Group lasso by block-coordinate descent:
//
//   minimize  sum_m (y_m - ybar - phi_m' beta)^2  +  lambda * sum_g ||beta_g||_2
//
// The loss is the plain residual sum of squares (no 1/n or 1/2 factor) and
// the group norms are unweighted. The intercept is ybar; design columns are
// used as given. Each block subproblem is solved exactly through an
// eigendecomposition of the block Gram matrix, so inactive groups come out as
// exact zeros.

#include "sartre/embed.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

namespace sartre {

/// Gram matrix of one block with its eigendecomposition.
struct BlockGram {
    Eigen::MatrixXd gram;
    Eigen::MatrixXd eigenvectors;
    /// Ascending, clipped at zero.
    Eigen::VectorXd eigenvalues;

    explicit BlockGram(Eigen::MatrixXd g);
};

/// Column-grouped design matrix. Each group is either a dense block or a
/// binary indicator block.
class GroupedDesign {
public:
    using Block = std::variant<Eigen::MatrixXd, IndicatorMatrix>;

    explicit GroupedDesign(std::size_t rows = 0) : rows_(rows) {}

    /// Throws DimensionMismatch if the block row count differs from rows().
    void add_group(std::size_t label, Block block);
    /// Shares a block across designs. A non-null `gram` must be built from
    /// Phi_g' Phi_g and is used instead of recomputing it.
    void add_group(std::size_t label, std::shared_ptr<const Block> block,
                   std::shared_ptr<const BlockGram> gram = nullptr);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return starts_.empty() ? 0 : starts_.back() + size(num_groups() - 1); }
    std::size_t num_groups() const noexcept { return blocks_.size(); }
    std::size_t start(std::size_t g) const { return starts_.at(g); }
    std::size_t size(std::size_t g) const;
    std::size_t label(std::size_t g) const { return labels_.at(g); }
    const Block& block(std::size_t g) const { return *blocks_.at(g); }

    /// out = Phi_g' v
    void transpose_times(std::size_t g, const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
    /// v -= Phi_g * delta
    void subtract_times(std::size_t g, const Eigen::VectorXd& delta, Eigen::VectorXd& v) const;
    /// Phi_g' Phi_g
    Eigen::MatrixXd gram(std::size_t g) const;
    /// Cached factorization if one was supplied, otherwise computed now.
    std::shared_ptr<const BlockGram> factor(std::size_t g) const;
    /// Phi * beta for the full coefficient vector.
    Eigen::VectorXd times(const Eigen::VectorXd& beta) const;

    Eigen::MatrixXd dense() const;

private:
    std::size_t rows_;
    std::vector<std::shared_ptr<const Block>> blocks_;
    std::vector<std::shared_ptr<const BlockGram>> grams_;
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> starts_;
};

struct GroupedCoefficients {
    Eigen::VectorXd beta;
    std::vector<std::size_t> starts;
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> labels;
    double intercept = 0.0;

    std::size_t num_groups() const noexcept { return starts.size(); }
    auto group(std::size_t g) const {
        return beta.segment(static_cast<Eigen::Index>(starts[g]), static_cast<Eigen::Index>(sizes[g]));
    }
    /// False iff every coefficient of group g is exactly zero.
    bool active(std::size_t g) const;
};

struct SolveReport {
    std::size_t iterations = 0;
    double objective = 0.0;
    double kkt_violation = 0.0;
    bool converged = false;
};

struct SolverOptions {
    double tol = 1e-6;
    std::size_t max_iter = 10000;
    /// Check that every sweep does not increase the objective; throws
    /// NumericalFailure otherwise.
    bool check_monotone = false;
};

struct GroupLassoFit {
    GroupedCoefficients coef;
    SolveReport report;
};

/// Smallest lambda for which beta = 0 is optimal: max_g ||2 Phi_g' (y - ybar)||.
double lambda_max(const GroupedDesign& design, const Eigen::VectorXd& y);

/// Objective value at (beta, ybar).
double group_lasso_objective(const GroupedDesign& design, const Eigen::VectorXd& y, double lambda,
                             const Eigen::VectorXd& beta);

/// Largest violation of the group-wise optimality conditions:
/// ||grad_g|| - lambda for zero groups, ||grad_g + lambda beta_g/||beta_g|| || otherwise.
double kkt_violation(const GroupedDesign& design, const Eigen::VectorXd& y, double lambda,
                     const Eigen::VectorXd& beta);

GroupLassoFit solve_group_lasso(const GroupedDesign& design, const Eigen::VectorXd& y, double lambda,
                                const SolverOptions& opts = {});

}  // namespace sartre
