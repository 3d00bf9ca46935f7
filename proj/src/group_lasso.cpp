#include "sartre/group_lasso.hpp"

#include "sartre/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sartre {

// ---------------------------------------------------------------------------
// GroupedDesign

void GroupedDesign::add_group(std::size_t label, Block block) {
    add_group(label, std::make_shared<const Block>(std::move(block)));
}

void GroupedDesign::add_group(std::size_t label, std::shared_ptr<const Block> block,
                              std::shared_ptr<const BlockGram> gram) {
    if (!block) throw InvalidArgument("null group block");
    const std::size_t block_rows = std::visit(
        [](const auto& b) { return static_cast<std::size_t>(b.rows()); }, *block);
    const std::size_t block_cols = std::visit(
        [](const auto& b) { return static_cast<std::size_t>(b.cols()); }, *block);
    if (block_rows != rows_) {
        throw DimensionMismatch("group block has " + std::to_string(block_rows) + " rows, design has " +
                                std::to_string(rows_));
    }
    if (gram && (static_cast<std::size_t>(gram->gram.rows()) != block_cols ||
                 static_cast<std::size_t>(gram->gram.cols()) != block_cols)) {
        throw DimensionMismatch("cached Gram matrix does not match its block");
    }
    starts_.push_back(cols());
    blocks_.push_back(std::move(block));
    grams_.push_back(std::move(gram));
    labels_.push_back(label);
}

std::size_t GroupedDesign::size(std::size_t g) const {
    return std::visit([](const auto& b) { return static_cast<std::size_t>(b.cols()); }, *blocks_.at(g));
}

void GroupedDesign::transpose_times(std::size_t g, const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    if (const auto* ind = std::get_if<IndicatorMatrix>(blocks_[g].get())) {
        out.setZero(static_cast<Eigen::Index>(ind->cols()));
        for (std::size_t m = 0; m < ind->rows(); ++m) {
            const double value = v[static_cast<Eigen::Index>(m)];
            for (std::uint32_t c : ind->row(m)) out[c] += value;
        }
    } else {
        out.noalias() = std::get<Eigen::MatrixXd>(*blocks_[g]).transpose() * v;
    }
}

void GroupedDesign::subtract_times(std::size_t g, const Eigen::VectorXd& delta, Eigen::VectorXd& v) const {
    if (const auto* ind = std::get_if<IndicatorMatrix>(blocks_[g].get())) {
        for (std::size_t m = 0; m < ind->rows(); ++m) {
            double s = 0.0;
            for (std::uint32_t c : ind->row(m)) s += delta[c];
            v[static_cast<Eigen::Index>(m)] -= s;
        }
    } else {
        v.noalias() -= std::get<Eigen::MatrixXd>(*blocks_[g]) * delta;
    }
}

Eigen::MatrixXd GroupedDesign::gram(std::size_t g) const {
    if (grams_.at(g)) return grams_[g]->gram;
    if (const auto* ind = std::get_if<IndicatorMatrix>(blocks_[g].get())) {
        const auto s = static_cast<Eigen::Index>(ind->cols());
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s, s);
        for (std::size_t m = 0; m < ind->rows(); ++m) {
            const auto row = ind->row(m);
            for (std::uint32_t a : row) {
                for (std::uint32_t b : row) out(a, b) += 1.0;
            }
        }
        return out;
    }
    const auto& dense = std::get<Eigen::MatrixXd>(*blocks_[g]);
    return dense.transpose() * dense;
}

std::shared_ptr<const BlockGram> GroupedDesign::factor(std::size_t g) const {
    if (grams_.at(g)) return grams_[g];
    return std::make_shared<const BlockGram>(gram(g));
}

BlockGram::BlockGram(Eigen::MatrixXd g) : gram(std::move(g)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    eigenvectors = eig.eigenvectors();
    eigenvalues = eig.eigenvalues().cwiseMax(0.0);
}

Eigen::VectorXd GroupedDesign::times(const Eigen::VectorXd& beta) const {
    if (static_cast<std::size_t>(beta.size()) != cols()) throw DimensionMismatch("coefficient length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows_));
    for (std::size_t g = 0; g < num_groups(); ++g) {
        const Eigen::VectorXd seg = beta.segment(static_cast<Eigen::Index>(start(g)), static_cast<Eigen::Index>(size(g)));
        subtract_times(g, -seg, out);
    }
    return out;
}

Eigen::MatrixXd GroupedDesign::dense() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols()));
    for (std::size_t g = 0; g < num_groups(); ++g) {
        const auto cols_g = static_cast<Eigen::Index>(size(g));
        const auto at = static_cast<Eigen::Index>(start(g));
        if (const auto* ind = std::get_if<IndicatorMatrix>(blocks_[g].get())) {
            out.middleCols(at, cols_g) = ind->dense();
        } else {
            out.middleCols(at, cols_g) = std::get<Eigen::MatrixXd>(*blocks_[g]);
        }
    }
    return out;
}

bool GroupedCoefficients::active(std::size_t g) const {
    const auto seg = group(g);
    return std::any_of(seg.begin(), seg.end(), [](double v) { return v != 0.0; });
}

// ---------------------------------------------------------------------------
// Solver

namespace {

void check_dims(const GroupedDesign& design, const Eigen::VectorXd& y) {
    if (static_cast<std::size_t>(y.size()) != design.rows()) {
        throw DimensionMismatch("target has " + std::to_string(y.size()) + " rows, design has " +
                                std::to_string(design.rows()));
    }
}

Eigen::VectorXd centered(const Eigen::VectorXd& y) {
    if (y.size() == 0) return y;
    return (y.array() - y.mean()).matrix();
}

// Exact minimizer of  b'Hb - 2c'b + lambda ||b||  for one block.
class BlockSolver {
public:
    explicit BlockSolver(std::shared_ptr<const BlockGram> f)
        : f_(std::move(f)), q_(f_->eigenvectors), lambda_(f_->eigenvalues) {
        const double top = lambda_.size() ? lambda_.maxCoeff() : 0.0;
        floor_ = 1e-12 * std::max(top, 1.0);
    }

    const Eigen::MatrixXd& gram() const { return f_->gram; }

    Eigen::VectorXd solve(const Eigen::VectorXd& c, double penalty) const {
        const Eigen::Index s = c.size();
        if (penalty > 0.0 && 2.0 * c.norm() <= penalty) return Eigen::VectorXd::Zero(s);

        Eigen::VectorXd ct = q_.transpose() * c;
        for (Eigen::Index k = 0; k < s; ++k) {
            if (lambda_[k] <= floor_) ct[k] = 0.0;
        }
        Eigen::VectorXd scale = Eigen::VectorXd::Zero(s);
        if (penalty <= 0.0) {
            for (Eigen::Index k = 0; k < s; ++k) {
                if (lambda_[k] > floor_) scale[k] = 1.0 / lambda_[k];
            }
            return q_ * scale.cwiseProduct(ct);
        }
        if (2.0 * ct.norm() <= penalty) return Eigen::VectorXd::Zero(s);

        const double t = radius(ct, penalty);
        const double half = 0.5 * penalty;
        for (Eigen::Index k = 0; k < s; ++k) {
            if (lambda_[k] > floor_) scale[k] = t / (t * lambda_[k] + half);
        }
        return q_ * scale.cwiseProduct(ct);
    }

private:
    // Root t > 0 of  sum_k ct_k^2 / (t lambda_k + penalty/2)^2 = 1, i.e. the
    // norm of the block minimizer.
    double radius(const Eigen::VectorXd& ct, double penalty) const {
        const double half = 0.5 * penalty;
        double min_pos = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < ct.size(); ++k) {
            if (lambda_[k] > floor_ && ct[k] != 0.0) min_pos = std::min(min_pos, lambda_[k]);
        }
        // g(t) = psi(t)^(-1/2) - 1 is increasing, negative at 0, >= 0 at hi.
        auto eval = [&](double t, double& slope) {
            double psi = 0.0, dpsi = 0.0;
            for (Eigen::Index k = 0; k < ct.size(); ++k) {
                if (lambda_[k] <= floor_ || ct[k] == 0.0) continue;
                const double den = t * lambda_[k] + half;
                const double c2 = ct[k] * ct[k];
                psi += c2 / (den * den);
                dpsi -= 2.0 * c2 * lambda_[k] / (den * den * den);
            }
            const double inv_sqrt = 1.0 / std::sqrt(psi);
            slope = -0.5 * inv_sqrt * inv_sqrt * inv_sqrt * dpsi;
            return inv_sqrt - 1.0;
        };
        double lo = 0.0;
        double hi = ct.norm() / min_pos;
        double t = 0.0;
        for (int it = 0; it < 200; ++it) {
            double slope = 0.0;
            const double g = eval(t, slope);
            if (g == 0.0) return t;
            if (g < 0.0) lo = t; else hi = t;
            if (hi - lo <= 1e-15 * hi) break;
            double next = slope > 0.0 ? t - g / slope : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - t) <= 1e-16 * std::max(1.0, t)) {
                t = next;
                break;
            }
            t = next;
        }
        return t;
    }

    std::shared_ptr<const BlockGram> f_;
    const Eigen::MatrixXd& q_;
    const Eigen::VectorXd& lambda_;
    double floor_ = 0.0;
};

double penalty_sum(const GroupedDesign& design, const Eigen::VectorXd& beta) {
    double total = 0.0;
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        total += beta.segment(static_cast<Eigen::Index>(design.start(g)), static_cast<Eigen::Index>(design.size(g))).norm();
    }
    return total;
}

double kkt_from_residual(const GroupedDesign& design, const Eigen::VectorXd& residual, double lambda,
                         const Eigen::VectorXd& beta) {
    double worst = 0.0;
    Eigen::VectorXd grad;
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        design.transpose_times(g, residual, grad);
        grad *= -2.0;
        const auto seg = beta.segment(static_cast<Eigen::Index>(design.start(g)), static_cast<Eigen::Index>(design.size(g)));
        const double norm = seg.norm();
        double violation;
        if (norm == 0.0) {
            violation = grad.norm() - lambda;
        } else {
            violation = (grad + (lambda / norm) * seg).norm();
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

}  // namespace

double lambda_max(const GroupedDesign& design, const Eigen::VectorXd& y) {
    check_dims(design, y);
    const Eigen::VectorXd yc = centered(y);
    double best = 0.0;
    Eigen::VectorXd grad;
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        design.transpose_times(g, yc, grad);
        best = std::max(best, 2.0 * grad.norm());
    }
    return best;
}

double group_lasso_objective(const GroupedDesign& design, const Eigen::VectorXd& y, double lambda,
                             const Eigen::VectorXd& beta) {
    check_dims(design, y);
    const Eigen::VectorXd residual = centered(y) - design.times(beta);
    return residual.squaredNorm() + lambda * penalty_sum(design, beta);
}

double kkt_violation(const GroupedDesign& design, const Eigen::VectorXd& y, double lambda,
                     const Eigen::VectorXd& beta) {
    check_dims(design, y);
    const Eigen::VectorXd residual = centered(y) - design.times(beta);
    return kkt_from_residual(design, residual, lambda, beta);
}

GroupLassoFit solve_group_lasso(const GroupedDesign& design, const Eigen::VectorXd& y, double lambda,
                                const SolverOptions& opts) {
    check_dims(design, y);
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
    if (!(opts.tol > 0.0)) throw InvalidArgument("tolerance must be positive");

    GroupLassoFit fit;
    auto& coef = fit.coef;
    coef.intercept = y.size() ? y.mean() : 0.0;
    coef.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.cols()));
    for (std::size_t g = 0; g < design.num_groups(); ++g) {
        coef.starts.push_back(design.start(g));
        coef.sizes.push_back(design.size(g));
        coef.labels.push_back(design.label(g));
    }

    std::vector<BlockSolver> blocks;
    blocks.reserve(design.num_groups());
    for (std::size_t g = 0; g < design.num_groups(); ++g) blocks.emplace_back(design.factor(g));

    const Eigen::VectorXd yc = centered(y);
    Eigen::VectorXd residual = yc;
    Eigen::VectorXd corr;
    double previous = residual.squaredNorm();
    auto& report = fit.report;

    // Sweeps alternate between all groups and the currently active ones; a
    // full sweep with no significant move is needed before the KKT check.
    bool full_sweep = true;
    for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
        report.iterations = iter;
        double max_step = 0.0;
        for (std::size_t g = 0; g < design.num_groups(); ++g) {
            if (!full_sweep && !coef.active(g)) continue;
            auto seg = coef.beta.segment(static_cast<Eigen::Index>(design.start(g)), static_cast<Eigen::Index>(design.size(g)));
            design.transpose_times(g, residual, corr);
            const Eigen::VectorXd c = corr + blocks[g].gram() * seg;
            const Eigen::VectorXd next = blocks[g].solve(c, lambda);
            const Eigen::VectorXd delta = next - seg;
            const double step = delta.norm();
            if (step > 0.0) {
                design.subtract_times(g, delta, residual);
                seg = next;
            }
            max_step = std::max(max_step, step);
        }

        const double objective = residual.squaredNorm() + lambda * penalty_sum(design, coef.beta);
        if (opts.check_monotone && objective > previous * (1.0 + 1e-12) + 1e-12) {
            throw NumericalFailure("objective increased from " + std::to_string(previous) + " to " +
                                   std::to_string(objective) + " at sweep " + std::to_string(iter));
        }
        previous = objective;

        const bool small = max_step <= opts.tol * (1.0 + coef.beta.norm());
        if (small && !full_sweep && iter < opts.max_iter) {
            full_sweep = true;
            continue;
        }
        if (!small) full_sweep = false;
        if (small || iter == opts.max_iter) {
            // Refresh the residual to shed accumulated rounding.
            residual = yc - design.times(coef.beta);
            report.kkt_violation = kkt_from_residual(design, residual, lambda, coef.beta);
            if (report.kkt_violation <= opts.tol) {
                report.converged = true;
                break;
            }
        }
    }
    report.objective = residual.squaredNorm() + lambda * penalty_sum(design, coef.beta);
    if (!report.converged) report.kkt_violation = kkt_from_residual(design, residual, lambda, coef.beta);
    return fit;
}

}  // namespace sartre
