#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "setplan/rational.hpp"

using setplan::Error;
using setplan::Rational;

TEST_CASE("construction normalizes") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, 4) == Rational(-1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(6, 3).is_integer());
}

TEST_CASE("arithmetic is exact") {
    Rational third(1, 3);
    CHECK(third + third + third == Rational(1));
    CHECK(Rational(1, 2) - Rational(1, 3) == Rational(1, 6));
    CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
    CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
    CHECK((-Rational(1, 2)).is_negative());
}

TEST_CASE("comparisons cross-multiply") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
    CHECK(Rational(7, 5) > Rational(4, 3));
    CHECK(Rational(2, 4) <= Rational(1, 2));
    CHECK(Rational(2, 4) >= Rational(1, 2));
}

TEST_CASE("large accumulations stay exact") {
    // sum of 1/k for k-scaled terms with large mixed denominators
    Rational sum(0);
    for (int i = 1; i <= 2000; ++i) sum += Rational(1, 123'403) - Rational(1, 123'403);
    CHECK(sum == Rational(0));
    Rational acc(0);
    for (int i = 0; i < 1182; ++i) acc += Rational(1, 20'000);
    CHECK(acc == Rational(1182, 20'000));
}

TEST_CASE("string round trip") {
    CHECK(Rational(1, 3).to_string() == "1/3");
    CHECK(Rational(-5).to_string() == "-5");
    CHECK(Rational::parse("22/7") == Rational(22, 7));
    CHECK(Rational::parse("-4") == Rational(-4));
    CHECK_THROWS_AS(Rational::parse("abc"), Error);
    CHECK_THROWS_AS(Rational(1, 0), Error);
}

TEST_CASE("decimal rendering carries at least 12 significant digits") {
    std::string rendered = Rational(1, 3).to_decimal();
    CHECK(rendered.substr(0, 14) == "0.333333333333");
    CHECK(Rational(5, 4).to_decimal() == "1.25");
    CHECK(Rational(-7).to_decimal() == "-7");
}

TEST_CASE("division by zero rational throws") {
    CHECK_THROWS_AS(Rational(1) / Rational(0), Error);
}
