#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace micg;

namespace {

Eigen::MatrixXd intercept(Eigen::Index n) { return Eigen::MatrixXd::Ones(n, 1); }

Eigen::MatrixXd with_slope(const Eigen::VectorXd &x) {
    Eigen::MatrixXd m(x.size(), 2);
    m.col(0).setOnes();
    m.col(1) = x;
    return m;
}

// Minimum pinball loss of an intercept-only model over the order statistics.
double order_statistic_oracle(const Eigen::VectorXd &y, double tau) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < y.size(); ++c) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) s += pinball(y(i) - y(c), tau);
        best = std::min(best, s);
    }
    return best;
}

void expect_optimality_band(const RegressionFit &f, double tau) {
    const auto n = static_cast<double>(f.residuals.size());
    double neg = 0, nonpos = 0;
    for (Eigen::Index i = 0; i < f.residuals.size(); ++i) {
        neg += f.residuals(i) < 0;
        nonpos += f.residuals(i) <= 0;
    }
    EXPECT_LE(neg / n, tau + 1e-12);
    EXPECT_GE(nonpos / n, tau - 1e-12);
}

} // namespace

TEST(Ols, PerfectFit) {
    Eigen::VectorXd x(5), y(5);
    x << 0, 1, 2, 3, 4;
    y = (2.0 + 3.0 * x.array()).matrix();
    auto f = ols_fit(y, with_slope(x));
    EXPECT_NEAR(f.coefficients(0), 2.0, 1e-12);
    EXPECT_NEAR(f.coefficients(1), 3.0, 1e-12);
    EXPECT_NEAR((*f.standard_errors)(0), 0.0, 1e-7);
    EXPECT_NEAR((*f.standard_errors)(1), 0.0, 1e-7);
}

TEST(Ols, InterceptOnlyIsMean) {
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 10;
    EXPECT_NEAR(ols_fit(y, intercept(4)).coefficients(0), 4.0, 1e-12);
}

TEST(Ols, ThreePoints) {
    Eigen::VectorXd x(3), y(3);
    x << 0, 1, 2;
    y << 1, 2, 4;
    auto f = ols_fit(y, with_slope(x));
    EXPECT_NEAR(f.coefficients(1), 1.5, 1e-12);
    EXPECT_NEAR(f.coefficients(0), 5.0 / 6.0, 1e-12);
    // Residual variance (1/6) / 1 and SEs from the closed form (X'X)^-1.
    EXPECT_NEAR(f.residual_variance, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR((*f.standard_errors)(1), std::sqrt(1.0 / 6.0 / 2.0), 1e-12);
}

TEST(Ols, ResidualsOrthogonal) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(60, 3);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
        x(i, 0) = 1;
        x(i, 1) = g(rng);
        x(i, 2) = g(rng) * 10;
        y(i) = 1 + x(i, 1) - 0.2 * x(i, 2) + g(rng);
    }
    auto f = ols_fit(y, x);
    Eigen::VectorXd xr = x.transpose() * f.residuals;
    EXPECT_LT(xr.cwiseAbs().maxCoeff(), 1e-9 * (1 + x.cwiseAbs().maxCoeff() * y.cwiseAbs().sum()));
}

TEST(Ols, RankDeficient) {
    Eigen::MatrixXd x(4, 2);
    x << 1, 2, 1, 2, 1, 2, 1, 2;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    EXPECT_THROW(ols_fit(y, x), ValidationError);
}

TEST(Quantile, MedianOfThree) {
    Eigen::VectorXd y(3);
    y << 1, 2, 100;
    EXPECT_DOUBLE_EQ(quantile_fit(y, intercept(3), 0.5).coefficients(0), 2.0);
}

TEST(Quantile, OrderStatisticOracle) {
    Eigen::VectorXd y(10);
    y << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    for (double tau : {0.1, 0.15, 0.5, 0.9}) {
        auto f = quantile_fit(y, intercept(10), tau);
        EXPECT_DOUBLE_EQ(f.objective, order_statistic_oracle(y, tau)) << tau;
        const double b = f.coefficients(0);
        EXPECT_TRUE((y.array() == b).any()) << "vertex solution must be a data point";
        expect_optimality_band(f, tau);
    }
    auto f = quantile_fit(y, intercept(10), 0.1);
    EXPECT_GE(f.coefficients(0), 1.0);
    EXPECT_LE(f.coefficients(0), 2.0);
}

TEST(Quantile, TiedData) {
    Eigen::VectorXd y(12);
    y << 3, 3, 3, 1, 1, 5, 5, 5, 5, 3, 1, 3;
    Eigen::VectorXd x(12);
    x << 0, 0, 1, 1, 0, 1, 1, 0, 0, 1, 1, 0;
    for (double tau : {0.1, 0.25, 0.5, 0.75}) {
        auto f = quantile_fit(y, with_slope(x), tau);
        expect_optimality_band(f, tau);
    }
}

TEST(Quantile, ShiftMovesInterceptOnly) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    Eigen::VectorXd x(80), y(80);
    for (int i = 0; i < 80; ++i) {
        x(i) = g(rng);
        y(i) = 0.5 + 2 * x(i) + g(rng);
    }
    auto a = quantile_fit(y, with_slope(x), 0.3);
    Eigen::VectorXd shifted = y.array() + 4.25;
    auto b = quantile_fit(shifted, with_slope(x), 0.3);
    EXPECT_NEAR(b.coefficients(0), a.coefficients(0) + 4.25, 1e-9);
    EXPECT_NEAR(b.coefficients(1), a.coefficients(1), 1e-9);
}

TEST(Quantile, NoWorseThanOls) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(100, 3);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) {
        x(i, 0) = 1;
        x(i, 1) = g(rng);
        x(i, 2) = static_cast<double>(i % 2);
        y(i) = 1 + x(i, 1) - x(i, 2) + std::exp(g(rng));
    }
    auto o = ols_fit(y, x);
    for (double tau : {0.1, 0.15, 0.5, 0.85}) {
        auto q = quantile_fit(y, x, tau);
        EXPECT_LE(q.objective, pinball_objective(y, x, o.coefficients, tau) + 1e-9);
        EXPECT_NEAR(q.objective, pinball_objective(y, x, q.coefficients, tau), 1e-9);
        expect_optimality_band(q, tau);
    }
}

TEST(Quantile, Errors) {
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    EXPECT_THROW(quantile_fit(y, intercept(3), 0.0), ValidationError);
    EXPECT_THROW(quantile_fit(y, intercept(3), 1.0), ValidationError);
    EXPECT_THROW(quantile_fit(y, intercept(2), 0.5), ValidationError);
}

TEST(Design, JoinAndDummies) {
    auto a = parse_csv("child_id,A,area\n1,0.5,urban\n2,0.7,rural\n3,0.2,rural\n");
    auto b = parse_csv("child_id,participation\n2,1\n1,0\n");
    auto t = join_tables({a, b});
    ASSERT_EQ(t.rows.size(), 2u);
    auto d = build_design(t, "participation", {"A", "area"});
    EXPECT_EQ(d.terms, (std::vector<std::string>{"(intercept)", "A", "area=urban"}));
    EXPECT_EQ(d.row_ids, (std::vector<std::string>{"1", "2"}));
    EXPECT_EQ(d.x(0, 2), 1.0);
    EXPECT_EQ(d.x(1, 2), 0.0);
}

TEST(FitsCsv, Layout) {
    Eigen::VectorXd y(3);
    y << 1, 2, 100;
    auto csv = write_fits_csv({quantile_fit(y, intercept(3), 0.5, {"(intercept)"})});
    EXPECT_EQ(csv, "model,term,estimate,se,tau\nquantile,(intercept),2,,0.5\n");
}
