#include "helpers.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

using namespace micg;
using testing_util::matrix;
using testing_util::reference_catalog;

TEST(EqualWeights, ReferenceCatalog) {
    auto c = reference_catalog();
    auto w = equal_nested_weights(c);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_NEAR(w.weight_of("stunting"), 1.0 / 98.0, 1e-12);
    EXPECT_NEAR(w.weight_of("domestic_tasks"), 1.0 / 14.0, 1e-12);
    EXPECT_NEAR(w.weight_of("time_to_school"), 1.0 / 14.0, 1e-12);
    EXPECT_EQ(w.provenance, WeightProvenance::equal);
}

TEST(EqualWeights, TwoByOne) {
    auto c = parse_catalog(R"({"dimensions":[
        {"name":"A","indicators":[{"id":"a","source_column":"x","rule":"x > 0"}]},
        {"name":"B","indicators":[{"id":"b","source_column":"y","rule":"y > 0"}]}]})");
    auto w = equal_nested_weights(c);
    EXPECT_EQ(w.weights, (std::vector<double>{0.5, 0.5}));
}

TEST(EqualWeights, OrderWithinDimensionIrrelevant) {
    auto a = equal_nested_weights(parse_catalog(R"({"dimensions":[
        {"name":"A","indicators":[{"id":"a1","source_column":"x","rule":"x > 0"},
                                  {"id":"a2","source_column":"y","rule":"y > 0"}]},
        {"name":"B","indicators":[{"id":"b","source_column":"z","rule":"z > 0"}]}]})"));
    auto b = equal_nested_weights(parse_catalog(R"({"dimensions":[
        {"name":"A","indicators":[{"id":"a2","source_column":"y","rule":"y > 0"},
                                  {"id":"a1","source_column":"x","rule":"x > 0"}]},
        {"name":"B","indicators":[{"id":"b","source_column":"z","rule":"z > 0"}]}]})"));
    for (const auto &id : {"a1", "a2", "b"}) {
        EXPECT_EQ(a.weight_of(id), b.weight_of(id));
    }
}

TEST(CustomWeights, OnesEqualNested) {
    auto c = reference_catalog();
    std::map<std::string, double> dims;
    for (const auto &n : c.dimension_names()) {
        dims[n] = 1.0;
    }
    auto w = custom_weights(dims, c);
    auto e = equal_nested_weights(c);
    ASSERT_EQ(w.ids, e.ids);
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
        EXPECT_NEAR(w.weights[i], e.weights[i], 1e-15);
    }
    EXPECT_EQ(w.provenance, WeightProvenance::custom);
}

TEST(CustomWeights, EducationDoubleAndZero) {
    auto c = reference_catalog();
    std::map<std::string, double> dims;
    for (const auto &n : c.dimension_names()) {
        dims[n] = 1.0;
    }
    dims["Education"] = 2.0;
    dims["Mobility"] = 0.0;
    auto w = custom_weights(dims, c);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    double education = 0.0, love = 0.0;
    const auto dim_of = c.dimension_of_indicator();
    for (std::size_t j = 0; j < w.ids.size(); ++j) {
        const auto &name = c.dimensions()[dim_of[j]].name;
        if (name == "Education") education += w.weights[j];
        if (name == "Love and care") love += w.weights[j];
    }
    EXPECT_NEAR(education, 2.0 * love, 1e-12);
    EXPECT_EQ(w.weight_of("time_to_school"), 0.0);
}

TEST(CustomWeights, Errors) {
    auto c = reference_catalog();
    std::map<std::string, double> dims;
    for (const auto &n : c.dimension_names()) {
        dims[n] = 1.0;
    }
    auto unknown = dims;
    unknown["Happiness"] = 1.0;
    EXPECT_THROW(custom_weights(unknown, c), ValidationError);
    auto negative = dims;
    negative["Education"] = -1.0;
    EXPECT_THROW(custom_weights(negative, c), ValidationError);
    auto partial = dims;
    partial.erase("Education");
    EXPECT_THROW(custom_weights(partial, c), ValidationError);
}

TEST(Pca, PerfectlyCorrelatedPair) {
    auto m = matrix({"a", "b"}, {{1, 1}, {0, 0}, {1, 1}, {0, 0}, {1, 1}});
    auto w = pca_weights(m);
    EXPECT_NEAR(w.weights[0], 0.5, 1e-12);
    EXPECT_NEAR(w.weights[1], 0.5, 1e-12);
}

TEST(Pca, ConstantColumnDropped) {
    auto m = matrix({"a", "b", "c"}, {{1, 0, 0}, {0, 0, 1}, {1, 0, 1}, {0, 0, 0}, {1, 0, 0}});
    auto w = pca_weights(m);
    EXPECT_EQ(w.dropped_indicators, std::vector<std::string>{"b"});
    EXPECT_FALSE(w.contains("b"));
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
}

TEST(Pca, NeedsTwoVaryingColumns) {
    auto m = matrix({"a", "b"}, {{1, 0}, {0, 0}, {1, 0}});
    EXPECT_THROW(pca_weights(m), ValidationError);
}

namespace {

// Dominant eigenpair of a symmetric 3x3 matrix from the characteristic polynomial.
std::array<double, 3> dominant_by_polynomial(const std::array<std::array<double, 3>, 3> &r) {
    auto det3 = [](const std::array<std::array<double, 3>, 3> &a) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    auto p = [&](double lambda) {
        auto a = r;
        for (int i = 0; i < 3; ++i) a[i][i] -= lambda;
        return det3(a);
    };
    // Scan down from above the spectrum to the first sign change, then bisect.
    double hi = 3.5, lo = hi;
    const double s_hi = p(hi);
    while (lo > 0.0) {
        lo -= 1e-3;
        if ((p(lo) > 0) != (s_hi > 0)) break;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((p(mid) > 0) == (s_hi > 0) ? hi : lo) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    auto a = r;
    for (int i = 0; i < 3; ++i) a[i][i] -= lambda;
    std::array<double, 3> v{a[0][1] * a[1][2] - a[0][2] * a[1][1], a[0][2] * a[1][0] - a[0][0] * a[1][2],
                            a[0][0] * a[1][1] - a[0][1] * a[1][0]};
    double s = std::fabs(v[0]) + std::fabs(v[1]) + std::fabs(v[2]);
    for (auto &x : v) x = std::fabs(x) / s;
    return v;
}

} // namespace

TEST(Pca, MatchesCharacteristicPolynomialOracle) {
    std::vector<std::vector<int>> rows{{1, 1, 0}, {1, 0, 0}, {0, 1, 1}, {0, 0, 1}, {1, 1, 1},
                                       {0, 0, 0}, {1, 0, 1}, {1, 1, 0}, {0, 0, 0}, {1, 1, 1}};
    // Correlation matrix by hand.
    std::array<std::array<double, 3>, 3> r{};
    const double n = static_cast<double>(rows.size());
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double mi = 0, mj = 0, sij = 0, sii = 0, sjj = 0;
            for (auto &row : rows) { mi += row[i] / n; mj += row[j] / n; }
            for (auto &row : rows) {
                sij += (row[i] - mi) * (row[j] - mj);
                sii += (row[i] - mi) * (row[i] - mi);
                sjj += (row[j] - mj) * (row[j] - mj);
            }
            r[i][j] = sij / std::sqrt(sii * sjj);
        }
    }
    const auto oracle = dominant_by_polynomial(r);
    auto w = pca_weights(matrix({"a", "b", "c"}, rows));
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(w.weights[j], oracle[j], 1e-8);
    }
}

TEST(Pca, RowPermutationAndFlipInvariance) {
    std::vector<std::vector<int>> rows{{1, 1, 0, 1}, {1, 0, 0, 0}, {0, 1, 1, 1}, {0, 0, 1, 0},
                                       {1, 1, 1, 1}, {0, 0, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 0}};
    auto base = pca_weights(matrix({"a", "b", "c", "d"}, rows));
    auto permuted = rows;
    std::reverse(permuted.begin(), permuted.end());
    std::rotate(permuted.begin(), permuted.begin() + 3, permuted.end());
    auto flipped = rows;
    for (auto &row : flipped) {
        for (auto &v : row) v = 1 - v;
    }
    auto wp = pca_weights(matrix({"a", "b", "c", "d"}, permuted));
    auto wf = pca_weights(matrix({"a", "b", "c", "d"}, flipped));
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(wp.weights[j], base.weights[j], 1e-12);
        EXPECT_NEAR(wf.weights[j], base.weights[j], 1e-12);
    }
}

TEST(Pca, RejectsMissing) {
    auto m = matrix({"a", "b"}, {{1, -1}, {0, 1}, {1, 0}}, MissingPolicy::renormalize);
    EXPECT_THROW(pca_weights(m), ValidationError);
}

TEST(Jacobi, DiagonalisesSymmetric) {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 2, 1, 3, 0.5, 2, 0.5, 5;
    auto e = jacobi_eigen(a);
    Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LT((rec - a).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WeightsJson, RoundTripDimensionWeights) {
    auto w = parse_dimension_weights(R"({"Education": 2, "Mobility": 1})");
    EXPECT_EQ(w.at("Education"), 2.0);
    auto text = weights_to_json(equal_nested_weights(reference_catalog()));
    EXPECT_NE(text.find("\"provenance\""), std::string::npos);
}
