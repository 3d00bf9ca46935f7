#include "sartre/error.hpp"
#include "sartre/group_lasso.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sartre;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
    return m;
}

Eigen::VectorXd random_vector(Eigen::Index n, Rng& rng) { return random_matrix(n, 1, rng).col(0); }

GroupedDesign dense_design(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& sizes) {
    GroupedDesign design(static_cast<std::size_t>(x.rows()));
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        design.add_group(g, Eigen::MatrixXd(x.middleCols(at, sizes[g])));
        at += sizes[g];
    }
    return design;
}

Eigen::VectorXd centered(const Eigen::VectorXd& y) { return (y.array() - y.mean()).matrix(); }

SolverOptions tight() {
    SolverOptions o;
    o.tol = 1e-10;
    o.max_iter = 100000;
    o.check_monotone = true;
    return o;
}

}  // namespace

TEST(GroupedDesignTest, Layout) {
    Rng rng(1);
    const Eigen::MatrixXd x = random_matrix(10, 5, rng);
    const GroupedDesign design = dense_design(x, {2, 3});
    EXPECT_EQ(design.num_groups(), 2u);
    EXPECT_EQ(design.cols(), 5u);
    EXPECT_EQ(design.start(1), 2u);
    EXPECT_EQ(design.size(1), 3u);
    EXPECT_TRUE(design.dense().isApprox(x));
    GroupedDesign wrong(9);
    EXPECT_THROW(wrong.add_group(0, Eigen::MatrixXd(x)), DimensionMismatch);
}

TEST(GroupedDesignTest, IndicatorBlockOperations) {
    IndicatorMatrix ind(4, 3, 1);
    const std::uint32_t cols[] = {0, 2, 2, 1};
    for (std::size_t m = 0; m < 4; ++m) ind.row(m)[0] = cols[m];
    GroupedDesign design(4);
    design.add_group(0, ind);
    const Eigen::MatrixXd dense = ind.dense();
    Eigen::VectorXd v(4);
    v << 1.0, 2.0, 3.0, 4.0;
    Eigen::VectorXd out;
    design.transpose_times(0, v, out);
    EXPECT_TRUE(out.isApprox(dense.transpose() * v));
    EXPECT_TRUE(design.gram(0).isApprox(dense.transpose() * dense));
    Eigen::VectorXd b(3);
    b << 0.5, -1.0, 2.0;
    EXPECT_TRUE(design.times(b).isApprox(dense * b));
}

TEST(LambdaMax, ZeroSolutionAtAndAboveThreshold) {
    Rng rng(2);
    const Eigen::MatrixXd x = random_matrix(40, 6, rng);
    const Eigen::VectorXd y = random_vector(40, rng);
    const GroupedDesign design = dense_design(x, {3, 3});
    const double lmax = lambda_max(design, y);
    const Eigen::VectorXd yc = centered(y);
    const double oracle = std::max((2.0 * x.leftCols(3).transpose() * yc).norm(), (2.0 * x.rightCols(3).transpose() * yc).norm());
    EXPECT_NEAR(lmax, oracle, 1e-12 * oracle);
    for (double f : {1.0, 1.5}) {
        const auto fit = solve_group_lasso(design, y, f * lmax);
        EXPECT_EQ(fit.coef.beta.norm(), 0.0);
        EXPECT_NEAR(fit.coef.intercept, y.mean(), 1e-15);
    }
    const auto half = solve_group_lasso(design, y, 0.5 * lmax, tight());
    EXPECT_TRUE(half.coef.active(0) || half.coef.active(1));
}

TEST(Solver, OrdinaryLeastSquaresAtZeroPenalty) {
    Rng rng(3);
    const Eigen::MatrixXd x = random_matrix(60, 6, rng);
    const Eigen::VectorXd y = random_vector(60, rng);
    const auto fit = solve_group_lasso(dense_design(x, {2, 4}), y, 0.0, tight());
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(centered(y));
    EXPECT_TRUE(fit.report.converged);
    EXPECT_LT((fit.coef.beta - ols).norm(), 1e-7 * std::max(1.0, ols.norm()));
}

TEST(Solver, OrthonormalClosedForm) {
    Rng rng(4);
    const Eigen::MatrixXd q = random_matrix(50, 9, rng).householderQr().householderQ() * Eigen::MatrixXd::Identity(50, 9);
    const Eigen::VectorXd y = random_vector(50, rng);
    const GroupedDesign design = dense_design(q, {3, 3, 3});
    const Eigen::VectorXd yc = centered(y);
    const double lambda = 0.8 * lambda_max(design, y);
    const auto fit = solve_group_lasso(design, y, lambda, tight());
    for (Eigen::Index g = 0; g < 3; ++g) {
        const Eigen::VectorXd z = q.middleCols(3 * g, 3).transpose() * yc;
        const double shrink = std::max(0.0, 1.0 - lambda / (2.0 * z.norm()));
        const Eigen::VectorXd expected = shrink * z;
        EXPECT_LT((fit.coef.group(static_cast<std::size_t>(g)) - expected).norm(), 1e-8) << "group " << g;
        EXPECT_EQ(fit.coef.active(static_cast<std::size_t>(g)), shrink > 0.0);
    }
}

TEST(Solver, KktAndMonotoneOnRandomProblems) {
    Rng rng(5);
    std::uniform_real_distribution<double> frac(0.05, 0.9);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd x = random_matrix(80, 12, rng);
        const Eigen::VectorXd y = x.leftCols(3) * random_vector(3, rng) + random_vector(80, rng);
        const GroupedDesign design = dense_design(x, {3, 4, 5});
        const double lambda = frac(rng) * lambda_max(design, y);
        SolverOptions opts;
        opts.check_monotone = true;
        const auto fit = solve_group_lasso(design, y, lambda, opts);
        EXPECT_TRUE(fit.report.converged);
        EXPECT_LE(kkt_violation(design, y, lambda, fit.coef.beta), 1e-6);
        EXPECT_NEAR(fit.report.objective, group_lasso_objective(design, y, lambda, fit.coef.beta),
                    1e-9 * fit.report.objective);
        EXPECT_LE(fit.report.objective, group_lasso_objective(design, y, lambda, Eigen::VectorXd::Zero(12)));
    }
}

TEST(Solver, CollinearIndicatorGroups) {
    // Each indicator block spans the constant vector, so the design is rank
    // deficient; the solver must still certify optimality.
    Rng rng(6);
    std::uniform_int_distribution<std::uint32_t> leaf(0, 3);
    GroupedDesign design(120);
    for (int g = 0; g < 3; ++g) {
        IndicatorMatrix ind(120, 8, 2);
        for (std::size_t m = 0; m < 120; ++m) {
            ind.row(m)[0] = leaf(rng);
            ind.row(m)[1] = 4 + leaf(rng);
        }
        design.add_group(static_cast<std::size_t>(g), ind);
    }
    const Eigen::VectorXd y = design.dense().leftCols(8) * random_vector(8, rng) + 0.3 * random_vector(120, rng);
    for (double f : {0.02, 0.2, 0.6}) {
        const double lambda = f * lambda_max(design, y);
        const auto fit = solve_group_lasso(design, y, lambda);
        EXPECT_TRUE(fit.report.converged) << f;
        EXPECT_LE(kkt_violation(design, y, lambda, fit.coef.beta), 1e-6);
    }
}

TEST(Solver, GroupOrderEquivariance) {
    Rng rng(7);
    const Eigen::MatrixXd x = random_matrix(70, 7, rng);
    const Eigen::VectorXd y = random_vector(70, rng);
    const GroupedDesign a = dense_design(x, {3, 4});
    GroupedDesign b(70);
    b.add_group(1, Eigen::MatrixXd(x.rightCols(4)));
    b.add_group(0, Eigen::MatrixXd(x.leftCols(3)));
    const double lambda = 0.3 * lambda_max(a, y);
    const auto fa = solve_group_lasso(a, y, lambda, tight());
    const auto fb = solve_group_lasso(b, y, lambda, tight());
    EXPECT_EQ(fb.coef.labels, (std::vector<std::size_t>{1, 0}));
    EXPECT_LT((fa.coef.group(0) - fb.coef.group(1)).norm(), 1e-8);
    EXPECT_LT((fa.coef.group(1) - fb.coef.group(0)).norm(), 1e-8);
}

TEST(Solver, DenseAndIndicatorBlocksAgree) {
    Rng rng(8);
    std::uniform_int_distribution<std::uint32_t> leaf(0, 4);
    IndicatorMatrix ind(90, 5, 1);
    for (std::size_t m = 0; m < 90; ++m) ind.row(m)[0] = leaf(rng);
    const Eigen::MatrixXd other = random_matrix(90, 2, rng);
    const Eigen::VectorXd y = random_vector(90, rng);
    GroupedDesign a(90), b(90);
    a.add_group(0, ind);
    a.add_group(1, other);
    b.add_group(0, ind.dense());
    b.add_group(1, other);
    auto shared = std::make_shared<const GroupedDesign::Block>(ind);
    GroupedDesign c(90);
    c.add_group(0, shared, std::make_shared<const BlockGram>(a.gram(0)));
    c.add_group(1, Eigen::MatrixXd(other));
    const double lambda = 0.2 * lambda_max(a, y);
    const auto fa = solve_group_lasso(a, y, lambda, tight());
    const auto fb = solve_group_lasso(b, y, lambda, tight());
    const auto fc = solve_group_lasso(c, y, lambda, tight());
    EXPECT_LT((fa.coef.beta - fb.coef.beta).norm(), 1e-8);
    EXPECT_EQ(fa.coef.beta, fc.coef.beta);
}

TEST(Solver, RejectsBadInput) {
    Rng rng(9);
    const GroupedDesign design = dense_design(random_matrix(10, 2, rng), {2});
    EXPECT_THROW(solve_group_lasso(design, Eigen::VectorXd::Zero(9), 1.0), DimensionMismatch);
    EXPECT_THROW(solve_group_lasso(design, Eigen::VectorXd::Zero(10), -1.0), InvalidArgument);
    SolverOptions bad;
    bad.tol = 0.0;
    EXPECT_THROW(solve_group_lasso(design, Eigen::VectorXd::Zero(10), 1.0, bad), InvalidArgument);
    GroupedDesign mismatch(10);
    EXPECT_THROW(mismatch.add_group(0, std::make_shared<const GroupedDesign::Block>(Eigen::MatrixXd::Zero(10, 2)),
                                    std::make_shared<const BlockGram>(Eigen::MatrixXd::Zero(3, 3))),
                 DimensionMismatch);
}
