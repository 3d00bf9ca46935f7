#include "sartre/ordering.hpp"

#include "sartre/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sartre {

void SteinConfig::validate() const {
    if (!(ridge > 0.0)) throw InvalidArgument("Stein ridge must be positive");
    if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("Stein bandwidth must be positive");
    if (max_samples < 2) throw InvalidArgument("max_samples must be at least 2");
}

double median_pairwise_distance(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) dist.push_back((x.row(a) - x.row(b)).norm());
    }
    if (dist.empty()) return 1.0;
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    double med = *mid;
    if (dist.size() % 2 == 0) {
        med = 0.5 * (med + *std::max_element(dist.begin(), mid));
    }
    return med;
}

namespace {

// Kernel quantities shared by the first- and second-order estimators.
struct SteinKernel {
    Eigen::MatrixXd x;
    double s2 = 1.0;
    Eigen::MatrixXd k;
    Eigen::VectorXd ksum;
    Eigen::MatrixXd kx;
    Eigen::LLT<Eigen::MatrixXd> solver;

    SteinKernel(const Eigen::MatrixXd& data, const SteinConfig& cfg) : x(data) {
        const Eigen::Index n = x.rows();
        if (n < 2) throw InvalidArgument("Stein estimator needs at least 2 samples");
        double s = cfg.bandwidth ? *cfg.bandwidth : median_pairwise_distance(x);
        if (!(s > 0.0)) s = 1.0;  // all rows identical
        s2 = s * s;

        const Eigen::VectorXd sq = x.rowwise().squaredNorm();
        k = -2.0 * x * x.transpose();
        k.colwise() += sq;
        k.rowwise() += sq.transpose();
        k = (k.array().max(0.0) * (-0.5 / s2)).exp().matrix();
        ksum = k.rowwise().sum();
        kx = k * x;

        Eigen::MatrixXd reg = k;
        reg.diagonal().array() += cfg.ridge;
        solver.compute(reg);
        if (solver.info() != Eigen::Success) {
            throw NumericalFailure("regularized Stein kernel is not positive definite");
        }
    }

    // sum_m' d k(x_m, x_m') / d x_m, which equals minus the divergence term
    // sum_m' d k(x_m', x_m) / d x_m' of Stein's identity.
    Eigen::MatrixXd grad_term() const {
        return ((x.array().colwise() * ksum.array()).matrix() - kx) / -s2;
    }

    // sum_m' d^2 k(x_m, x_m') / d x_{m,i}^2
    Eigen::MatrixXd second_term() const {
        const Eigen::MatrixXd kx2 = k * x.array().square().matrix();
        Eigen::ArrayXXd out = x.array().square().colwise() * ksum.array();
        out -= 2.0 * x.array() * kx.array();
        out += kx2.array();
        out /= s2 * s2;
        out.colwise() -= ksum.array() / s2;
        return out.matrix();
    }

    Eigen::MatrixXd score() const { return solver.solve(grad_term()); }

    Eigen::MatrixXd hessian_diag() const {
        const Eigen::MatrixXd g = score();
        return solver.solve(second_term()) - g.array().square().matrix();
    }
};

Eigen::MatrixXd prepared_rows(const Dataset& data, const SteinConfig& cfg) {
    cfg.validate();
    if (data.n() < 2) throw InvalidArgument("Stein estimator needs at least 2 samples");
    if (!ordering_subsamples(data.n(), cfg)) return data.values();
    std::vector<std::size_t> rows(data.n());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(cfg.subsample_seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(cfg.max_samples);
    std::sort(rows.begin(), rows.end());
    return data.select_rows(rows).values();
}

Eigen::VectorXd column_variance(const Eigen::MatrixXd& h) {
    const Eigen::RowVectorXd mean = h.colwise().mean();
    const double denom = std::max<double>(1.0, static_cast<double>(h.rows() - 1));
    return ((h.rowwise() - mean).array().square().colwise().sum() / denom).transpose();
}

}  // namespace

bool ordering_subsamples(std::size_t n, const SteinConfig& cfg) { return n > cfg.max_samples; }

Eigen::MatrixXd stein_score(const Dataset& data, const SteinConfig& cfg) {
    cfg.validate();
    if (data.n() < 2) throw InvalidArgument("Stein estimator needs at least 2 samples");
    return SteinKernel(data.values(), cfg).score();
}

Eigen::MatrixXd stein_hessian_diag(const Dataset& data, const SteinConfig& cfg) {
    cfg.validate();
    if (data.n() < 2) throw InvalidArgument("Stein estimator needs at least 2 samples");
    return SteinKernel(data.values(), cfg).hessian_diag();
}

Eigen::VectorXd leaf_statistics(const Dataset& data, const SteinConfig& cfg) {
    return column_variance(stein_hessian_diag(data, cfg));
}

TopologicalOrder estimate_order(const Dataset& data, const SteinConfig& cfg) {
    const Eigen::MatrixXd x = prepared_rows(data, cfg);
    const std::size_t d = data.d();
    std::vector<Var> remaining(d);
    std::iota(remaining.begin(), remaining.end(), Var{0});
    std::vector<Var> reversed;
    reversed.reserve(d);

    auto argmin = [](const Eigen::VectorXd& stats) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < stats.size(); ++k) {
            if (stats[k] < stats[best]) best = k;
        }
        return static_cast<std::size_t>(best);
    };

    if (!cfg.recompute_each_round && d > 1) {
        const Eigen::VectorXd stats = column_variance(SteinKernel(x, cfg).hessian_diag());
        std::stable_sort(remaining.begin(), remaining.end(),
                         [&](Var a, Var b) { return stats[static_cast<Eigen::Index>(a)] > stats[static_cast<Eigen::Index>(b)]; });
        return TopologicalOrder(std::move(remaining));
    }

    while (remaining.size() > 1) {
        Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(remaining.size()));
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            sub.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(remaining[k]));
        }
        const std::size_t leaf = argmin(column_variance(SteinKernel(sub, cfg).hessian_diag()));
        reversed.push_back(remaining[leaf]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(leaf));
    }
    if (!remaining.empty()) reversed.push_back(remaining.front());
    return TopologicalOrder(std::vector<Var>(reversed.rbegin(), reversed.rend()));
}

}  // namespace sartre
