#include "sartre/prune.hpp"

#include "sartre/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace sartre {

void SartreConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be a non-negative number");
    trees.validate();
    if (!(solver.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    if (solver.max_iter == 0) throw InvalidArgument("solver max_iter must be positive");
}

double SartreConfig::solver_lambda(std::size_t n) const {
    return scale == LambdaScale::Mean ? 2.0 * static_cast<double>(n) * lambda : lambda;
}

double SartreModel::predict(Var target, std::span<const double> row) const {
    const TargetFit& fit = fits.at(target);
    double value = fit.coef.intercept;
    for (std::size_t g = 0; g < fit.candidates.size(); ++g) {
        const IntervalSet& rset = intervals.at(fit.candidates[g]);
        const double x = row[fit.candidates[g]];
        const auto beta = fit.coef.group(g);
        for (std::size_t t = 0; t < rset.num_trees(); ++t) {
            value += beta[static_cast<Eigen::Index>(rset.leaf_of(t, x))];
        }
    }
    return value;
}

GroupedDesign build_design(const std::vector<IndicatorMatrix>& embeddings, const std::vector<Var>& candidates) {
    const std::size_t rows = embeddings.empty() ? 0 : embeddings.front().rows();
    GroupedDesign design(rows);
    for (Var j : candidates) design.add_group(j, embeddings.at(j));
    return design;
}

SartreModel fit_sartre(const Dataset& data, const TopologicalOrder& order, const SartreConfig& cfg) {
    cfg.validate();
    if (order.size() != data.d()) {
        throw DimensionMismatch("order has " + std::to_string(order.size()) + " variables, data has " +
                                std::to_string(data.d()));
    }
    if (data.n() < 2) throw InvalidArgument("pruning needs at least 2 samples");

    SartreModel model;
    model.config = cfg;
    model.intervals = fit_all_trees(data, cfg.trees);
    auto embeddings = embed_dataset(data, model.intervals);
    // Blocks and their Gram matrices do not depend on the target, so every
    // design shares them.
    std::vector<std::shared_ptr<const GroupedDesign::Block>> blocks(data.d());
    std::vector<std::shared_ptr<const BlockGram>> grams(data.d());
    for (Var j = 0; j < data.d(); ++j) {
        blocks[j] = std::make_shared<const GroupedDesign::Block>(std::move(embeddings[j]));
        GroupedDesign single(data.n());
        single.add_group(j, blocks[j]);
        grams[j] = single.factor(0);
    }
    model.graph = full_dag_from_order(order);
    model.fits.resize(data.d());

    const double penalty = cfg.solver_lambda(data.n());
    detail::parallel_for(data.d(), cfg.workers, [&](std::size_t i) {
        TargetFit& fit = model.fits[i];
        fit.target = i;
        fit.candidates = order.predecessors(i);
        if (fit.candidates.empty()) return;
        GroupedDesign design(data.n());
        for (Var j : fit.candidates) design.add_group(j, blocks[j], grams[j]);
        const auto col = data.column(i);
        GroupLassoFit solved = solve_group_lasso(design, col, penalty, cfg.solver);
        fit.coef = std::move(solved.coef);
        fit.report = solved.report;
    });

    for (const TargetFit& fit : model.fits) {
        for (std::size_t g = 0; g < fit.candidates.size(); ++g) {
            if (!fit.coef.active(g)) model.graph.remove_edge(fit.candidates[g], fit.target);
        }
    }
    return model;
}

Dag sartre_prune(const Dataset& data, const TopologicalOrder& order, const SartreConfig& cfg) {
    return fit_sartre(data, order, cfg).graph;
}

double PiecewiseConstant::operator()(double x) const {
    const auto it = std::lower_bound(boundaries.begin(), boundaries.end(), x);
    const auto idx = static_cast<std::size_t>(it - boundaries.begin());
    if (idx == 0) return lower_tail;
    if (idx == boundaries.size()) return upper_tail;
    return levels[idx - 1];
}

bool PiecewiseConstant::is_zero() const {
    return lower_tail == 0.0 && upper_tail == 0.0 &&
           std::all_of(levels.begin(), levels.end(), [](double v) { return v == 0.0; });
}

PiecewiseConstant flatten_shape(std::span<const Interval> intervals, std::span<const double> coeffs) {
    if (intervals.size() != coeffs.size()) {
        throw DimensionMismatch("got " + std::to_string(intervals.size()) + " intervals and " +
                                std::to_string(coeffs.size()) + " coefficients");
    }
    PiecewiseConstant out;
    for (const Interval& r : intervals) {
        if (std::isfinite(r.lo)) out.boundaries.push_back(r.lo);
        if (std::isfinite(r.hi)) out.boundaries.push_back(r.hi);
    }
    std::sort(out.boundaries.begin(), out.boundaries.end());
    out.boundaries.erase(std::unique(out.boundaries.begin(), out.boundaries.end()), out.boundaries.end());

    // Every interval either contains an elementary piece or misses it, so one
    // representative point per piece decides membership. Sums run in interval
    // order, matching a direct evaluation bit for bit.
    auto level_at = [&](double probe) {
        double level = 0.0;
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            if (intervals[k].contains(probe)) level += coeffs[k];
        }
        return level;
    };

    const auto& b = out.boundaries;
    if (b.empty()) {
        out.lower_tail = out.upper_tail = level_at(0.0);
        return out;
    }
    out.lower_tail = level_at(b.front());
    for (std::size_t p = 0; p + 1 < b.size(); ++p) out.levels.push_back(level_at(b[p + 1]));
    out.upper_tail = level_at(std::nextafter(b.back(), kInf));
    return out;
}

std::vector<ShapeFunction> shape_function_export(const SartreModel& model, Var target) {
    const TargetFit& fit = model.fits.at(target);
    std::vector<ShapeFunction> out;
    for (std::size_t g = 0; g < fit.candidates.size(); ++g) {
        ShapeFunction sf;
        sf.parent = fit.candidates[g];
        if (fit.coef.active(g)) {
            const auto beta = fit.coef.group(g);
            const std::vector<double> coeffs(beta.begin(), beta.end());
            sf.shape = flatten_shape(model.intervals.at(sf.parent).intervals(), coeffs);
        }
        out.push_back(std::move(sf));
    }
    return out;
}

}  // namespace sartre
