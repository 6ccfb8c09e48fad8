#include <gtest/gtest.h>

#include <random>

#include "rmtail/polynomial.hpp"

using rmtail::Polynomial;
using rmtail::Rational;
using P = Polynomial<Rational>;

TEST(Polynomial, ZeroIsCanonical) {
  P zero{Rational(0), Rational(0)};
  EXPECT_TRUE(zero.is_zero());
  EXPECT_EQ(zero.degree(), -1);
  EXPECT_EQ(zero, P{});
  EXPECT_THROW(zero.leading(), rmtail::domain_error);
}

TEST(Polynomial, TrimsTrailingZeros) {
  P p{Rational(1), Rational(2), Rational(0)};
  EXPECT_EQ(p.degree(), 1);
  EXPECT_EQ(p[5], Rational(0));
}

TEST(Polynomial, ExactEvaluationAtRationals) {
  P p{Rational(-1), Rational(0), Rational(3, 2)};
  EXPECT_EQ(p(Rational(1, 3)), Rational(-5, 6));
}

TEST(Polynomial, FloatingEvaluationUsesHorner) {
  P p{Rational(1), Rational(-3), Rational(1, 4)};
  EXPECT_DOUBLE_EQ(p(2.0), 1.0 - 6.0 + 1.0);
}

TEST(Polynomial, DerivativeOfConstantIsZero) {
  EXPECT_TRUE(derivative(P::constant(Rational(7))).is_zero());
}

TEST(Polynomial, DerivativeOfHalfSquareIsX) {
  EXPECT_EQ(derivative(P{Rational(0), Rational(0), Rational(1, 2)}), (P{Rational(0), Rational(1)}));
}

TEST(Polynomial, DivisionReconstructsNumerator) {
  P num{Rational(3), Rational(-2), Rational(0), Rational(5, 7), Rational(1)};
  P den{Rational(1, 2), Rational(0), Rational(3)};
  auto [q, r] = divmod(num, den);
  EXPECT_LT(r.degree(), den.degree());
  EXPECT_EQ(q * den + r, num);
}

TEST(Polynomial, DivisionByZeroThrows) {
  EXPECT_THROW(divmod(P{Rational(1)}, P{}), rmtail::domain_error);
}

TEST(Polynomial, ToStringLowestPowerFirst) {
  P p{Rational(0), Rational(-16), Rational(48), Rational(-128, 3)};
  EXPECT_EQ(to_string(p), "-16*x + 48*x^2 - 128/3*x^3");
  EXPECT_EQ(to_string(P{}), "0");
}

TEST(Polynomial, DerivativeIsLinear) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 6), deg(0, 8);
  auto random_poly = [&] {
    std::vector<Rational> c(static_cast<std::size_t>(deg(rng)) + 1);
    for (auto& v : c) v = Rational(num(rng), den(rng));
    return P(c);
  };
  for (int i = 0; i < 200; ++i) {
    const P p = random_poly(), q = random_poly();
    const Rational alpha(num(rng), den(rng)), beta(num(rng), den(rng));
    EXPECT_EQ(derivative(alpha * p + beta * q), alpha * derivative(p) + beta * derivative(q));
  }
}
