#include <gtest/gtest.h>

#include "latticeborell/error.hpp"
#include "latticeborell/rational.hpp"

using namespace latticeborell;

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("3/4"), Rational(3, 4));
  EXPECT_EQ(parse_rational(" -6/8 "), Rational(-3, 4));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("0.3"), Rational(3, 10));
  EXPECT_EQ(parse_rational("010"), Rational(10));
  EXPECT_EQ(parse_rational("0"), Rational(0));
  EXPECT_EQ(parse_rational("1.5e2"), Rational(150));
  EXPECT_EQ(parse_rational("25e-2"), Rational(1, 4));
  EXPECT_EQ(parse_rational(".5"), Rational(1, 2));
  EXPECT_EQ(parse_rational("0.5/0.25"), Rational(2));
}

TEST(ParseRational, Errors) {
  EXPECT_THROW(parse_rational(""), Error);
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("abc"), Error);
  EXPECT_THROW(parse_rational("1.2.3"), Error);
}

TEST(RationalFromDouble, Exact) {
  EXPECT_EQ(rational_from_double(0.25), Rational(1, 4));
  EXPECT_EQ(rational_from_double(-3.0), Rational(-3));
  EXPECT_EQ(rational_from_double(0.0), Rational(0));
  EXPECT_EQ(to_double(rational_from_double(0.1)), 0.1);
  EXPECT_NE(rational_from_double(0.1), Rational(1, 10));
  EXPECT_THROW(rational_from_double(1.0 / 0.0), Error);
}

TEST(RationalHelpers, Misc) {
  EXPECT_EQ(to_string(Rational(6, 4)), "3/2");
  EXPECT_EQ(to_string(Rational(-2)), "-2");
  EXPECT_EQ(pow(Rational(2, 3), 3), Rational(8, 27));
  EXPECT_EQ(pow(Rational(5), 0), Rational(1));
  EXPECT_EQ(floor_int(Rational(-3, 2)), -2);
  EXPECT_EQ(ceil_int(Rational(-3, 2)), -1);
  EXPECT_EQ(floor_int(Rational(7, 2)), 3);
  EXPECT_TRUE(is_small_integer(4.0));
  EXPECT_FALSE(is_small_integer(4.5));
  EXPECT_FALSE(is_small_integer(-1.0));
}
