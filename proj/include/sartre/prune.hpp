#pragma once

// Edge pruning with sparse additive models. For every target, the candidate
// parents (predecessors in a topological order) enter a group-lasso
// regression over their interval embeddings; a candidate whose coefficient
// group is exactly zero loses its edge.

#include "sartre/embed.hpp"
#include "sartre/graph.hpp"
#include "sartre/group_lasso.hpp"
#include "sartre/synthgen.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sartre {

/// How the configured lambda maps onto the solver's unnormalized objective.
enum class LambdaScale {
    /// lambda multiplies the penalty of  sum of squared residuals + lambda * sum ||beta_g||.
    Sum,
    /// lambda multiplies the penalty of  (1/2n) * sum of squared residuals + lambda * sum ||beta_g||,
    /// so the solver runs with 2 n lambda.
    Mean,
};

struct SartreConfig {
    double lambda = 0.1;
    LambdaScale scale = LambdaScale::Mean;
    TreeConfig trees;
    SolverOptions solver{.tol = 1e-6, .max_iter = 10000, .check_monotone = false};
    /// Parallel workers for per-target solves; results do not depend on it.
    std::size_t workers = 1;

    void validate() const;
    /// Penalty handed to the solver for a problem with n rows.
    double solver_lambda(std::size_t n) const;
};

/// Group-lasso result for one target.
struct TargetFit {
    Var target = 0;
    /// Candidate parents in group order.
    std::vector<Var> candidates;
    GroupedCoefficients coef;
    SolveReport report;
};

struct SartreModel {
    SartreConfig config;
    std::vector<IntervalSet> intervals;
    /// One entry per variable, indexed by variable; targets without
    /// candidates have empty fits.
    std::vector<TargetFit> fits;
    Dag graph;

    /// Fitted additive model evaluated on one observation row.
    double predict(Var target, std::span<const double> row) const;
};

/// Assembles the grouped design of the given candidate parents.
GroupedDesign build_design(const std::vector<IndicatorMatrix>& embeddings, const std::vector<Var>& candidates);

SartreModel fit_sartre(const Dataset& data, const TopologicalOrder& order, const SartreConfig& cfg);

/// Pruned DAG; always a subgraph of full_dag_from_order(order).
Dag sartre_prune(const Dataset& data, const TopologicalOrder& order, const SartreConfig& cfg);

/// Piecewise-constant function with sorted breakpoints g_1 < ... < g_q:
/// lower_tail on (-inf, g_1], levels[p] on (g_{p+1}, g_{p+2}] (0-based p),
/// upper_tail on (g_q, +inf).
struct PiecewiseConstant {
    std::vector<double> boundaries;
    std::vector<double> levels;
    double lower_tail = 0.0;
    double upper_tail = 0.0;

    double operator()(double x) const;
    bool is_zero() const;
};

/// Rewrites sum_k coeffs[k] * 1{x in intervals[k]} over the sorted union of
/// the finite interval boundaries. Throws DimensionMismatch on length mismatch.
PiecewiseConstant flatten_shape(std::span<const Interval> intervals, std::span<const double> coeffs);

struct ShapeFunction {
    Var parent = 0;
    PiecewiseConstant shape;
};

/// One flattened shape function per candidate parent of `target`.
std::vector<ShapeFunction> shape_function_export(const SartreModel& model, Var target);

}  // namespace sartre
