#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace micg;
using testing_util::child;
using testing_util::reference_catalog;

namespace {

DeprivationMatrix reference_matrix(const std::vector<std::vector<int>> &rows) {
    auto c = reference_catalog();
    return testing_util::matrix(c.indicator_ids(), rows);
}

std::vector<int> zeros() { return std::vector<int>(29, 0); }

} // namespace

TEST(Scores, AllZeroAndAllOne) {
    auto c = reference_catalog();
    auto w = equal_nested_weights(c);
    auto r = deprivation_scores(reference_matrix({zeros(), std::vector<int>(29, 1)}), w);
    EXPECT_EQ(r.children[0].deprivation, 0.0);
    EXPECT_EQ(r.children[0].achievement, 1.0);
    EXPECT_FALSE(r.children[0].deprived);
    EXPECT_EQ(r.children[1].deprivation, 1.0);
    EXPECT_EQ(r.children[1].achievement, 0.0);
    EXPECT_TRUE(r.children[1].deprived);
    auto k1 = deprivation_scores(reference_matrix({std::vector<int>(29, 1)}), w, 1.0);
    EXPECT_TRUE(k1.children[0].deprived);
}

TEST(Scores, LifeAndHealthOnly) {
    auto c = reference_catalog();
    auto row = zeros();
    for (int j = 0; j < 7; ++j) row[j] = 1;
    auto r = deprivation_scores(reference_matrix({row}), equal_nested_weights(c));
    EXPECT_NEAR(r.children[0].deprivation, 1.0 / 14.0, 1e-15);
    EXPECT_FALSE(r.children[0].deprived);
}

TEST(Scores, CutoffIsWeak) {
    auto m = testing_util::matrix({"a", "b", "c"}, {{1, 0, 0}});
    WeightVector w{{"a", "b", "c"}, {0.5, 0.25, 0.25}, WeightProvenance::custom, {}};
    EXPECT_TRUE(deprivation_scores(m, w, 0.5).children[0].deprived);
    EXPECT_THROW(deprivation_scores(m, w, 0.0), ValidationError);
    EXPECT_THROW(deprivation_scores(m, w, 1.5), ValidationError);
}

TEST(Scores, RenormalizeOverObserved) {
    auto m = testing_util::matrix({"a", "b", "c"}, {{1, -1, 0}, {-1, -1, -1}}, MissingPolicy::renormalize);
    WeightVector w{{"a", "b", "c"}, {0.5, 0.25, 0.25}, WeightProvenance::custom, {}};
    m.cells.resize(3);
    m.children.resize(1);
    auto r = deprivation_scores(m, w);
    EXPECT_NEAR(r.children[0].deprivation, 0.5 / 0.75, 1e-15);
    auto all_missing = testing_util::matrix({"a", "b", "c"}, {{-1, -1, -1}}, MissingPolicy::renormalize);
    EXPECT_THROW(deprivation_scores(all_missing, w), ValidationError);
    auto wrong_policy = testing_util::matrix({"a", "b", "c"}, {{1, -1, 0}});
    EXPECT_THROW(deprivation_scores(wrong_policy, w), ValidationError);
}

TEST(Scores, SumsOfAAndDAndSummaries) {
    std::mt19937_64 rng(5);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 50; ++i) {
        auto row = zeros();
        for (auto &v : row) v = static_cast<int>(rng() % 2);
        rows.push_back(row);
    }
    auto r = deprivation_scores(reference_matrix(rows), equal_nested_weights(reference_catalog()));
    double q = 0, s = 0;
    for (const auto &c : r.children) {
        EXPECT_EQ(c.achievement + c.deprivation, 1.0);
        EXPECT_GE(c.deprivation, 0.0);
        EXPECT_LE(c.deprivation, 1.0);
        EXPECT_EQ(c.deprived, c.deprivation >= r.k);
        if (c.deprived) { ++q; s += c.deprivation; }
    }
    EXPECT_DOUBLE_EQ(r.headcount_ratio(), q / 50.0);
    EXPECT_DOUBLE_EQ(r.intensity(), s / q);
    EXPECT_DOUBLE_EQ(r.adjusted_headcount(), q / 50.0 * s / q);
}

TEST(Scores, Monotonicity) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + rng() % 10;
        std::vector<std::string> ids;
        std::vector<double> raw;
        double total = 0;
        for (std::size_t j = 0; j < m; ++j) {
            ids.push_back("i" + std::to_string(j));
            raw.push_back(static_cast<double>(rng() % 1000) / 997.0);
            total += raw.back();
        }
        if (total == 0) continue;
        for (auto &w : raw) w /= total;
        std::vector<int> row(m);
        for (auto &v : row) v = static_cast<int>(rng() % 2);
        WeightVector w{ids, raw, WeightProvenance::custom, {}};
        const double before = deprivation_scores(testing_util::matrix(ids, {row}), w).children[0].deprivation;
        for (std::size_t j = 0; j < m; ++j) {
            if (row[j] == 1) continue;
            auto flipped = row;
            flipped[j] = 1;
            const double after = deprivation_scores(testing_util::matrix(ids, {flipped}), w).children[0].deprivation;
            EXPECT_GE(after, before);
        }
    }
}

TEST(Scores, ScalingDimensionWeightsKeepsRanking) {
    auto c = reference_catalog();
    std::map<std::string, double> a, b;
    int i = 1;
    for (const auto &n : c.dimension_names()) {
        a[n] = i;
        b[n] = 7.5 * i;
        ++i;
    }
    std::mt19937_64 rng(3);
    std::vector<std::vector<int>> rows;
    for (int r = 0; r < 40; ++r) {
        auto row = zeros();
        for (auto &v : row) v = static_cast<int>(rng() % 3 == 0);
        rows.push_back(row);
    }
    auto m = reference_matrix(rows);
    auto ra = deprivation_scores(m, custom_weights(a, c));
    auto rb = deprivation_scores(m, custom_weights(b, c));
    for (std::size_t x = 0; x < rows.size(); ++x) {
        EXPECT_EQ(ra.children[x].deprived, rb.children[x].deprived);
        for (std::size_t y = 0; y < rows.size(); ++y) {
            EXPECT_EQ(ra.children[x].deprivation < ra.children[y].deprivation,
                      rb.children[x].deprivation < rb.children[y].deprivation);
        }
    }
}

TEST(Dimensions, Examples) {
    auto c = reference_catalog();
    auto w = equal_nested_weights(c);
    auto row = zeros();
    row[28] = 1;             // mobility
    row[0] = row[1] = row[2] = 1; // 3 of 7 life-and-health
    auto d = dimension_achievements(reference_matrix({zeros(), row}), c, w);
    ASSERT_EQ(d.dimensions.size(), 14u);
    for (double s : d.scores[0]) EXPECT_EQ(s, 1.0);
    EXPECT_EQ(d.scores[1][13], 0.0);
    EXPECT_NEAR(d.scores[1][0], 4.0 / 7.0, 1e-15);
    for (std::size_t k = 1; k < 13; ++k) EXPECT_EQ(d.scores[1][k], 1.0);
}

TEST(Dimensions, ConsistentWithIndicatorScore) {
    auto c = reference_catalog();
    std::map<std::string, double> dw;
    int i = 0;
    for (const auto &n : c.dimension_names()) dw[n] = 1 + (i++ % 3);
    auto w = custom_weights(dw, c);
    std::mt19937_64 rng(8);
    std::vector<std::vector<int>> rows;
    for (int r = 0; r < 30; ++r) {
        auto row = zeros();
        for (auto &v : row) v = static_cast<int>(rng() % 2);
        rows.push_back(row);
    }
    auto m = reference_matrix(rows);
    auto res = deprivation_scores(m, w);
    auto dims = dimension_achievements(m, c, w);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double d = 0.0;
        for (std::size_t k = 0; k < 14; ++k) d += dims.dimension_weights[k] * (1.0 - dims.scores[r][k]);
        EXPECT_NEAR(d, res.children[r].deprivation, 1e-12);
    }
}

TEST(Dimensions, BinaryMode) {
    auto c = reference_catalog();
    auto row = zeros();
    row[0] = 1;
    auto d = dimension_achievements(reference_matrix({row}), c, equal_nested_weights(c), DimensionMode::binary);
    EXPECT_EQ(d.scores[0][0], 0.0);
    EXPECT_EQ(d.scores[0][1], 1.0);
}

TEST(Profile, MeansAndSingletons) {
    DimensionScores s;
    s.dimensions = {"A", "B"};
    s.child_ids = {"x", "y", "z"};
    s.scores = {{1.0, 0.25}, {0.0, 0.75}, {0.5, 0.5}};
    auto p = group_profile(s, {"g1", "g1", "g2"});
    ASSERT_EQ(p.groups, (std::vector<std::string>{"g1", "g2"}));
    EXPECT_DOUBLE_EQ(p.percent[0][0], 50.0);
    EXPECT_DOUBLE_EQ(p.percent[0][1], 50.0);
    EXPECT_DOUBLE_EQ(p.percent[1][0], 50.0);
    EXPECT_EQ(p.sizes, (std::vector<std::size_t>{2, 1}));
    auto back = read_profile_csv(write_profile_csv(p));
    EXPECT_EQ(back.groups, p.groups);
    EXPECT_EQ(back.percent, p.percent);
}

TEST(Profile, GroupLabels) {
    std::vector<ChildInfo> kids{child("a", Sex::female, Area::rural, "PE"), child("b", Sex::male, Area::urban, "PE")};
    EXPECT_EQ(group_labels(kids, {"sex", "area"}), (std::vector<std::string>{"female|rural", "male|urban"}));
    EXPECT_THROW(group_labels(kids, {"age"}), ValidationError);
}

TEST(Frequency, Table2Reconstruction) {
    struct Country {
        const char *name;
        int um, uf, rm, rf;
        double pct[8];
    };
    const Country table[] = {
        {"Ethiopia", 399, 362, 611, 540, {20.87, 18.93, 31.96, 28.24, 39.8, 60.2, 52.82, 47.18}},
        {"India", 271, 226, 765, 684, {13.93, 11.61, 39.31, 35.15, 25.54, 74.46, 53.24, 46.76}},
        {"Peru", 694, 666, 296, 307, {35.35, 33.93, 15.08, 15.64, 69.28, 30.72, 50.43, 49.57}},
        {"Vietnam", 213, 194, 800, 763, {10.81, 9.85, 40.61, 38.73, 20.66, 79.34, 51.42, 48.58}},
    };
    std::vector<ChildInfo> kids;
    int id = 0;
    for (const auto &c : table) {
        auto add = [&](int n, Sex s, Area a) {
            for (int i = 0; i < n; ++i) kids.push_back(child(std::to_string(++id), s, a, c.name));
        };
        add(c.um, Sex::male, Area::urban);
        add(c.uf, Sex::female, Area::urban);
        add(c.rm, Sex::male, Area::rural);
        add(c.rf, Sex::female, Area::rural);
    }
    auto t = frequency_table(kids);
    ASSERT_EQ(t.rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto &r = t.rows[i];
        const auto &c = table[i];
        EXPECT_EQ(r.country, c.name);
        EXPECT_EQ(r.urban(), static_cast<std::size_t>(c.um + c.uf));
        const std::size_t counts[8] = {r.urban_male, r.urban_female, r.rural_male, r.rural_female,
                                       r.urban(),    r.rural(),      r.male(),     r.female()};
        for (int k = 0; k < 8; ++k) {
            EXPECT_NEAR(std::stod(format_percent(r.percent(counts[k]))), c.pct[k], 0.005 + 1e-9)
                << c.name << " column " << k;
        }
        EXPECT_NEAR(r.percent(r.urban_male) + r.percent(r.urban_female) + r.percent(r.rural_male) +
                        r.percent(r.rural_female),
                    100.0, 0.1);
    }
}

TEST(Frequency, SmallCases) {
    auto one = frequency_table({child("a")});
    EXPECT_EQ(one.rows[0].urban_male, 1u);
    EXPECT_DOUBLE_EQ(one.rows[0].percent(1), 100.0);
    auto four = frequency_table({child("a"), child("b"), child("c", Sex::female), child("d", Sex::female)});
    EXPECT_DOUBLE_EQ(four.rows[0].percent(four.rows[0].male()), 50.0);
    EXPECT_DOUBLE_EQ(four.rows[0].percent(four.rows[0].female()), 50.0);
    EXPECT_EQ(four.rows[0].rural(), 0u);
}
