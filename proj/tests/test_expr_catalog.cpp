#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace micg;

namespace {

Value eval(const std::string &src, std::vector<std::string> names, std::vector<Value> vals) {
    Expr e = Expr::parse(src);
    e.bind(names);
    return e.evaluate(vals);
}

} // namespace

TEST(Expr, ComparisonAndLogic) {
    EXPECT_EQ(std::get<bool>(eval("haz < -2", {"haz"}, {-2.5})), true);
    EXPECT_EQ(std::get<bool>(eval("haz < -2", {"haz"}, {-2.0})), false);
    EXPECT_EQ(std::get<bool>(eval("a > 1 AND NOT (b == 'x')", {"a", "b"}, {2.0, std::string("y")})), true);
    EXPECT_EQ(std::get<bool>(eval("a >= 1 or b != 'x'", {"a", "b"}, {0.0, std::string("x")})), false);
    EXPECT_EQ(std::get<bool>(eval("a > b", {"a", "b"}, {3.0, 2.0})), true);
}

TEST(Expr, MissingPropagates) {
    EXPECT_TRUE(is_missing(eval("haz < -2", {"haz"}, {Missing{}})));
    EXPECT_TRUE(is_missing(eval("a > 1 OR b > 1", {"a", "b"}, {2.0, Missing{}})));
}

TEST(Expr, NegationFlipsAndKeepsMissing) {
    Expr e = Expr::parse("meals_per_day < 4");
    Expr n = e.negated();
    std::vector<std::string> names{"meals_per_day"};
    e.bind(names);
    n.bind(names);
    for (double v : {1.0, 3.9, 4.0, 7.0}) {
        std::vector<Value> vals{v};
        EXPECT_NE(std::get<bool>(e.evaluate(vals)), std::get<bool>(n.evaluate(vals)));
    }
    std::vector<Value> missing{Missing{}};
    EXPECT_TRUE(is_missing(n.evaluate(missing)));
}

TEST(Expr, Arithmetic) {
    Expr e = Expr::parse("1/y^2 + sqrt(x) * 2 - min(x, y)");
    std::vector<std::string> names{"x", "y"};
    e.bind(names);
    std::vector<Value> vals{4.0, 2.0};
    EXPECT_DOUBLE_EQ(e.evaluate_number(vals), 0.25 + 4.0 - 2.0);
    EXPECT_FALSE(e.is_boolean());
}

TEST(Expr, SyntaxErrorPosition) {
    try {
        Expr::parse("haz <");
        FAIL() << "expected a syntax error";
    } catch (const SyntaxError &e) {
        EXPECT_EQ(e.token(), 3u);
    }
    EXPECT_THROW(Expr::parse("haz < < 2"), SyntaxError);
    EXPECT_THROW(Expr::parse("(a > 1"), SyntaxError);
}

TEST(Expr, UnknownNameOnBind) {
    Expr e = Expr::parse("haz < -2");
    std::vector<std::string> names{"whz"};
    EXPECT_THROW(e.bind(names), ValidationError);
}

TEST(Catalog, ReferenceShape) {
    auto c = load_catalog(std::string(MICG_DATA_DIR) + "/reference_catalog.json");
    EXPECT_EQ(c.dimension_count(), 14u);
    EXPECT_EQ(c.indicator_count(), 29u);
    EXPECT_EQ(c.dimensions().front().name, "Life and physical health");
    EXPECT_EQ(c.dimensions().front().indicators.size(), 7u);
    EXPECT_EQ(c.dimensions().back().name, "Mobility");
    EXPECT_FALSE(c.parameters().at("domestic_hours_threshold").has_value());
}

TEST(Catalog, Minimal) {
    auto c = parse_catalog(R"({"dimensions":[{"name":"Life","indicators":[
        {"id":"stunting","source_column":"haz","rule":"haz < -2"}]}]})");
    EXPECT_EQ(c.dimension_count(), 1u);
    EXPECT_EQ(c.indicator_count(), 1u);
    EXPECT_EQ(c.source_columns(), std::vector<std::string>{"haz"});
}

TEST(Catalog, Errors) {
    EXPECT_THROW(parse_catalog(R"({"dimensions":[{"name":"A","indicators":[
        {"id":"s","source_column":"haz","rule":"haz <"}]}]})"),
                 SyntaxError);
    EXPECT_THROW(parse_catalog(R"({"dimensions":[{"name":"A","indicators":[
        {"id":"s","source_column":"haz","rule":"haz < 1"},
        {"id":"s","source_column":"whz","rule":"whz < 1"}]}]})"),
                 ValidationError);
    EXPECT_THROW(parse_catalog(R"({"dimensions":[{"name":"A","indicators":[]}]})"), ValidationError);
    EXPECT_THROW(parse_catalog(R"({"dimensions":[{"name":"A","indicators":[
        {"id":"s","source_column":"haz","rule":"whz < 1"}]}]})"),
                 ValidationError);
    EXPECT_THROW(parse_catalog("{"), ValidationError);
}

TEST(Catalog, SyntaxErrorKeepsTokenPosition) {
    try {
        parse_catalog(R"({"dimensions":[{"name":"A","indicators":[
            {"id":"s","source_column":"haz","rule":"haz <"}]}]})");
        FAIL();
    } catch (const SyntaxError &e) {
        EXPECT_EQ(e.token(), 3u);
        EXPECT_NE(std::string(e.what()).find("'s'"), std::string::npos);
    }
}

TEST(Catalog, MissingFileIsIoError) { EXPECT_THROW(load_catalog("/nonexistent/catalog.json"), IoError); }
