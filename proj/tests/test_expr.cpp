#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "greflect/expr.hpp"

using namespace greflect;

TEST_CASE("unary minus binds tighter than multiplication") {
    const CoefficientExpr e = parse_coefficient_expr("-2*x");
    const expr::Node& root = e.root();
    REQUIRE(root.kind == expr::NodeKind::Mul);
    REQUIRE(root.lhs->kind == expr::NodeKind::Negate);
    CHECK(root.lhs->lhs->kind == expr::NodeKind::Literal);
    CHECK(root.lhs->lhs->literal == 2.0);
    CHECK(root.rhs->kind == expr::NodeKind::Variable);
    CHECK(e.eval(0.0, 3.0, 0.0, 0.0) == -6.0);
}

TEST_CASE("function calls and mixed arithmetic") {
    const CoefficientExpr e = parse_coefficient_expr("sin(t) + 0.5*tanh(x)");
    CHECK(e.eval(0.0, 0.0, 0.0, 0.0) == 0.0);
    CHECK(e.eval(1.0, 2.0, 0.0, 0.0) ==
          doctest::Approx(std::sin(1.0) + 0.5 * std::tanh(2.0)).epsilon(1e-15));
    CHECK(e.uses(0));
    CHECK(e.uses(1));
    CHECK(!e.uses(2));
    CHECK(!e.uses(3));
}

TEST_CASE("precedence and associativity") {
    CHECK(parse_coefficient_expr("2+3*4").eval(0, 0, 0, 0) == 14.0);
    CHECK(parse_coefficient_expr("(2+3)*4").eval(0, 0, 0, 0) == 20.0);
    CHECK(parse_coefficient_expr("2-3-4").eval(0, 0, 0, 0) == -5.0);
    CHECK(parse_coefficient_expr("12/2/3").eval(0, 0, 0, 0) == 2.0);
    CHECK(parse_coefficient_expr("-2*-3").eval(0, 0, 0, 0) == 6.0);
    CHECK(parse_coefficient_expr("min(2, max(3, qv))").eval(0, 0, 0, 5.0) == 2.0);
    CHECK(parse_coefficient_expr("sqrt(abs(b))").eval(0, 0, -4.0, 0) == 2.0);
}

TEST_CASE("unbalanced parenthesis reports the end of input") {
    try {
        parse_coefficient_expr("min(x, 1");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 9);
    }
}

TEST_CASE("unknown identifiers carry their position") {
    try {
        parse_coefficient_expr("x + spot");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 5);
        CHECK(std::string(e.what()).find("spot") != std::string::npos);
    }
}

TEST_CASE("arity mismatches are rejected") {
    CHECK_THROWS_AS(parse_coefficient_expr("sin(x, 1)"), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("min(x)"), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("max(1, 2, 3)"), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("sin"), parse_error);
}

TEST_CASE("malformed inputs") {
    CHECK_THROWS_AS(parse_coefficient_expr(""), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("2 +"), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("x 3"), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("(x"), parse_error);
    CHECK_THROWS_AS(parse_coefficient_expr("x ^ 2"), parse_error);
}

TEST_CASE("division by an exact zero is a reported evaluation error") {
    const CoefficientExpr e = parse_coefficient_expr("1/x");
    CHECK(e.eval(0, 2.0, 0, 0) == 0.5);
    CHECK_THROWS_AS(e.eval(0, 0.0, 0, 0), numeric_error);
    CHECK_THROWS_AS(parse_coefficient_expr("1/(x - x)").eval(0, 3.0, 0, 0), numeric_error);
}

TEST_CASE("to_coefficient carries the declared bound and label") {
    const Coefficient c = parse_coefficient_expr("-2*x", 2.0).to_coefficient();
    CHECK(c.lipschitz_bound == 2.0);
    CHECK(c.label == "-2*x");
    CHECK(c(0.0, 1.5, 0.0, 0.0) == -3.0);
}

namespace {

// Random AST generator for the round-trip property. Divisions get literal
// denominators bounded away from zero so evaluation stays total.
expr::NodePtr random_tree(std::mt19937_64& rng, int depth) {
    std::uniform_real_distribution<double> unif(-4.0, 4.0);
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
    switch (pick(rng)) {
        case 0: return expr::literal(unif(rng));
        case 1: return expr::variable(static_cast<int>(rng() % 4));
        case 2: return expr::negate(random_tree(rng, depth - 1));
        case 3:
            return expr::binary(expr::NodeKind::Add, random_tree(rng, depth - 1),
                                random_tree(rng, depth - 1));
        case 4:
            return expr::binary(expr::NodeKind::Sub, random_tree(rng, depth - 1),
                                random_tree(rng, depth - 1));
        case 5:
            return expr::binary(expr::NodeKind::Mul, random_tree(rng, depth - 1),
                                random_tree(rng, depth - 1));
        case 6: {
            std::uniform_real_distribution<double> denom(0.5, 4.0);
            return expr::binary(expr::NodeKind::Div, random_tree(rng, depth - 1),
                                expr::literal(denom(rng)));
        }
        case 7: {
            const expr::Func fns[] = {expr::Func::Sin, expr::Func::Cos, expr::Func::Tanh,
                                      expr::Func::Abs};
            return expr::call(fns[rng() % 4], random_tree(rng, depth - 1));
        }
        default: {
            const expr::Func fns[] = {expr::Func::Min, expr::Func::Max};
            return expr::call(fns[rng() % 2], random_tree(rng, depth - 1),
                              random_tree(rng, depth - 1));
        }
    }
}

}  // namespace

TEST_CASE("render/parse round trip matches direct interpretation on random trees") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> point(-3.0, 3.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const expr::NodePtr tree = random_tree(rng, 4);
        const std::string text = expr::render(*tree);
        CoefficientExpr parsed;
        try {
            parsed = parse_coefficient_expr(text);
        } catch (const parse_error& e) {
            CAPTURE(text);
            FAIL("rendered tree failed to parse: ", e.what());
        }
        const double t = point(rng), x = point(rng), b = point(rng), qv = point(rng);
        const double direct = expr::eval(*tree, t, x, b, qv);
        const double roundtrip = parsed.eval(t, x, b, qv);
        if (std::isfinite(direct)) {
            CAPTURE(text);
            CHECK(std::abs(direct - roundtrip) <= 1e-12 * (1.0 + std::abs(direct)));
        }
    }
}
