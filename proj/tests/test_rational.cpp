#include <doctest.h>

#include "ssn/rational.hpp"

using ssn::Rational;

TEST_CASE("normalization and sign") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, 4) == Rational(-1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(0, -7).den == 1);
    CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("arithmetic") {
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 2) - Rational(2, 3) == Rational(-1, 6));
    CHECK(Rational(3, 4) * Rational(2, 9) == Rational(1, 6));
    CHECK(Rational(3, 4) / Rational(3, 2) == Rational(1, 2));
    CHECK_THROWS_AS(Rational(1, 2) / Rational(0), std::invalid_argument);
    CHECK((-Rational(3, 5)).num == -3);
    CHECK(Rational(-7, 2).abs() == Rational(7, 2));
}

TEST_CASE("ordering uses cross multiplication") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
    CHECK(Rational(2, 5) <= Rational(2, 5));
    CHECK(Rational(5, 2) > Rational(2));
    // Values where double rounding would tie.
    CHECK(Rational(1000000000000000001, 3) > Rational(1000000000000000000, 3));
}

TEST_CASE("rendering") {
    CHECK(Rational(1, 2).str() == "1/2");
    CHECK(Rational(4).str() == "4");
    CHECK(Rational(1, 2).decimal(6) == "0.500000");
    CHECK(Rational(2, 3).decimal(6) == "0.666667");
    CHECK(Rational(-1, 8).decimal(3) == "-0.125");
    CHECK(Rational(1, 3).to_double() == doctest::Approx(1.0 / 3.0));
}
