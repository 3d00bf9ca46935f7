#include "sartre/synthgen.hpp"

#include "sartre/error.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

namespace sartre {

Dataset::Dataset(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw InvalidArgument("dataset contains non-finite values");
}

Dataset Dataset::select_columns(const std::vector<Var>& cols) const {
    Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] >= d()) throw InvalidArgument("column index out of range");
        out.col(static_cast<Eigen::Index>(k)) = values_.col(static_cast<Eigen::Index>(cols[k]));
    }
    return Dataset(std::move(out));
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= n()) throw InvalidArgument("row index out of range");
        out.row(static_cast<Eigen::Index>(k)) = values_.row(static_cast<Eigen::Index>(rows[k]));
    }
    return Dataset(std::move(out));
}

void AnmSpec::validate() const {
    const std::size_t d = dag.num_vars();
    if (link.size() != d || noise_std.size() != d) {
        throw InvalidArgument("ANM spec has per-node vectors of the wrong length");
    }
    for (double s : noise_std) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("noise standard deviations must be positive");
    }
    if (!(gp_bandwidth > 0.0) || !std::isfinite(gp_bandwidth)) {
        throw InvalidArgument("GP bandwidth must be positive");
    }
}

namespace {

std::vector<double> draw_noise(std::size_t d, NoiseRange range, Rng& rng) {
    if (!(range.lo > 0.0) || range.hi < range.lo) throw InvalidArgument("invalid noise range");
    std::uniform_real_distribution<double> unif(range.lo, range.hi);
    std::vector<double> out(d);
    for (double& s : out) s = range.hi > range.lo ? unif(rng) : range.lo;
    return out;
}

}  // namespace

AnmSpec make_nonlinear_spec(const Dag& dag, Seed seed, NoiseRange noise) {
    return make_mixed_spec(dag, 0.0, seed, noise);
}

AnmSpec make_mixed_spec(const Dag& dag, double p_linear, Seed seed, NoiseRange noise) {
    if (!(p_linear >= 0.0 && p_linear <= 1.0)) throw InvalidArgument("p_linear must lie in [0, 1]");
    Rng rng(seed);
    AnmSpec spec;
    spec.dag = dag;
    spec.seed = derive_seed(seed, stream::kSample);
    spec.noise_std = draw_noise(dag.num_vars(), noise, rng);
    spec.link.assign(dag.num_vars(), LinkKind::GpNonlinear);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Var v = 0; v < dag.num_vars(); ++v) {
        // Draw for every node so the assignment of node v does not depend on
        // which other nodes are roots.
        const double u = unif(rng);
        if (!dag.parents(v).empty() && u < p_linear) spec.link[v] = LinkKind::Linear;
    }
    return spec;
}

Eigen::VectorXd sample_gp(const Eigen::MatrixXd& inputs, double bandwidth, Rng& rng) {
    const Eigen::Index n = inputs.rows();
    const Eigen::VectorXd sq = inputs.rowwise().squaredNorm();
    Eigen::MatrixXd kernel = -2.0 * inputs * inputs.transpose();
    kernel.colwise() += sq;
    kernel.rowwise() += sq.transpose();
    const double scale = -1.0 / (2.0 * bandwidth * bandwidth);
    kernel = (kernel.array().max(0.0) * scale).exp().matrix();

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index k = 0; k < n; ++k) z[k] = normal(rng);

    static constexpr std::array<double, 3> kJitter{1e-8, 1e-6, 1e-4};
    for (double jitter : kJitter) {
        Eigen::MatrixXd jittered = kernel;
        jittered.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd f = llt.matrixL() * z;
            if (f.allFinite()) return f;
        }
    }
    throw NumericalFailure("GP kernel factorization failed after jitter 1e-4");
}

Dataset sample_anm(const AnmSpec& spec, std::size_t n) {
    spec.validate();
    if (n < 2) throw InvalidArgument("need at least 2 samples");
    const std::size_t d = spec.dag.num_vars();
    const auto rows = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(d));

    for (Var i : topological_sort(spec.dag)) {
        Rng rng(derive_seed(spec.seed, i));
        const auto parents = spec.dag.parents(i);
        auto col = x.col(static_cast<Eigen::Index>(i));
        col.setZero();
        if (!parents.empty()) {
            if (spec.link[i] == LinkKind::Linear) {
                std::uniform_real_distribution<double> magnitude(0.5, 2.0);
                std::bernoulli_distribution negative(0.5);
                for (Var p : parents) {
                    double w = magnitude(rng);
                    if (negative(rng)) w = -w;
                    col += w * x.col(static_cast<Eigen::Index>(p));
                }
            } else {
                Eigen::MatrixXd inputs(rows, static_cast<Eigen::Index>(parents.size()));
                for (std::size_t k = 0; k < parents.size(); ++k) {
                    inputs.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(parents[k]));
                }
                col = sample_gp(inputs, spec.gp_bandwidth, rng);
            }
        }
        std::normal_distribution<double> noise(0.0, spec.noise_std[i]);
        for (Eigen::Index m = 0; m < rows; ++m) col[m] += noise(rng);
    }
    return Dataset(std::move(x));
}

}  // namespace sartre
