#include "sartre/error.hpp"
#include "sartre/ordering.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sartre;

namespace {

Dataset gaussian(std::size_t n, std::vector<double> scales, Seed seed) {
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(scales.size()));
    for (Eigen::Index m = 0; m < x.rows(); ++m)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(m, j) = scales[static_cast<std::size_t>(j)] * nd(rng);
    return Dataset(std::move(x));
}

// Central second difference of log p for an independent Gaussian with the
// given scale, evaluated at x.
double fd_log_density_curvature(double x, double scale) {
    auto logp = [&](double t) { return -0.5 * t * t / (scale * scale); };
    const double h = 1e-3;
    return (logp(x + h) - 2.0 * logp(x) + logp(x - h)) / (h * h);
}

bool is_permutation_of_d(const TopologicalOrder& o, std::size_t d) {
    std::vector<Var> seq = o.sequence();
    std::sort(seq.begin(), seq.end());
    for (std::size_t k = 0; k < seq.size(); ++k)
        if (seq[k] != k) return false;
    return seq.size() == d;
}

}  // namespace

TEST(SteinConfigTest, Validation) {
    SteinConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.ridge = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = SteinConfig{};
    cfg.bandwidth = -1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(MedianDistance, HandExample) {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 1.0, 3.0;
    // pairwise distances 1, 3, 2
    EXPECT_DOUBLE_EQ(median_pairwise_distance(x), 2.0);
    Eigen::MatrixXd y(4, 1);
    y << 0.0, 1.0, 2.0, 4.0;
    // 1, 2, 4, 1, 3, 2 -> median of {1,1,2,2,3,4} = 2
    EXPECT_DOUBLE_EQ(median_pairwise_distance(y), 2.0);
}

TEST(SteinScore, GaussianScoreDirection) {
    const Dataset data = gaussian(600, {1.0, 1.0}, 3);
    const Eigen::MatrixXd s = stein_score(data, SteinConfig{});
    ASSERT_EQ(s.rows(), 600);
    ASSERT_EQ(s.cols(), 2);
    double cos_sum = 0.0;
    for (Eigen::Index m = 0; m < s.rows(); ++m) {
        const Eigen::Vector2d truth = -data.values().row(m).transpose();
        const Eigen::Vector2d est = s.row(m).transpose();
        cos_sum += est.dot(truth) / (est.norm() * truth.norm());
    }
    EXPECT_GT(cos_sum / 600.0, 0.85);
}

TEST(SteinHessian, MatchesFiniteDifferenceCurvature) {
    const std::vector<double> scales{1.0, 2.0};
    const Dataset data = gaussian(800, scales, 5);
    const Eigen::MatrixXd h = stein_hessian_diag(data, SteinConfig{});
    for (Eigen::Index j = 0; j < 2; ++j) {
        double oracle = 0.0;
        for (Eigen::Index m = 0; m < h.rows(); ++m) {
            oracle += fd_log_density_curvature(data.values()(m, j), scales[static_cast<std::size_t>(j)]);
        }
        oracle /= static_cast<double>(h.rows());
        EXPECT_NEAR(h.col(j).mean(), oracle, 0.35 * std::abs(oracle)) << "column " << j;
    }
}

TEST(LeafStatistics, NonlinearSinkHasSmallestVariance) {
    int hits = 0;
    for (Seed s = 0; s < 5; ++s) {
        const Dag chain(2, std::vector<Edge>{{0, 1}});
        AnmSpec spec = make_nonlinear_spec(chain, s);
        const Dataset data = sample_anm(spec, 500);
        const Eigen::VectorXd stat = leaf_statistics(data, SteinConfig{});
        hits += stat[1] < stat[0];
    }
    EXPECT_GE(hits, 4);
}

TEST(EstimateOrder, ReturnsPermutation) {
    const Dataset data = sample_anm(make_nonlinear_spec(gen_erdos_renyi(6, 6.0, 1), 1), 300);
    const TopologicalOrder o = estimate_order(data, SteinConfig{});
    EXPECT_TRUE(is_permutation_of_d(o, 6));
    SteinConfig once;
    once.recompute_each_round = false;
    EXPECT_TRUE(is_permutation_of_d(estimate_order(data, once), 6));
}

TEST(EstimateOrder, SingleVariable) {
    const Dataset data = gaussian(50, {1.0}, 1);
    EXPECT_EQ(estimate_order(data, SteinConfig{}), TopologicalOrder::identity(1));
}

TEST(EstimateOrder, TranslationInvariant) {
    const Dataset data = sample_anm(make_nonlinear_spec(gen_erdos_renyi(5, 5.0, 2), 2), 300);
    Eigen::MatrixXd shifted = data.values();
    for (Eigen::Index j = 0; j < shifted.cols(); ++j) shifted.col(j).array() += 0.25 * static_cast<double>(j + 1);
    EXPECT_EQ(estimate_order(data, SteinConfig{}), estimate_order(Dataset(shifted), SteinConfig{}));
}

TEST(EstimateOrder, SubsamplingIsSeeded) {
    const Dataset data = sample_anm(make_nonlinear_spec(gen_erdos_renyi(4, 4.0, 3), 3), 400);
    SteinConfig cfg;
    cfg.max_samples = 150;
    cfg.subsample_seed = 17;
    EXPECT_TRUE(ordering_subsamples(400, cfg));
    EXPECT_FALSE(ordering_subsamples(150, cfg));
    const auto a = estimate_order(data, cfg);
    EXPECT_EQ(a, estimate_order(data, cfg));
    EXPECT_TRUE(is_permutation_of_d(a, 4));
}

TEST(EstimateOrder, RecoversNonlinearChain) {
    int correct = 0;
    for (Seed s = 0; s < 5; ++s) {
        const Dag chain(3, std::vector<Edge>{{0, 1}, {1, 2}});
        const Dataset data = sample_anm(make_nonlinear_spec(chain, 100 + s), 600);
        correct += estimate_order(data, SteinConfig{}).consistent_with(chain);
    }
    EXPECT_GE(correct, 3);
}
