#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rmtail/orthopoly.hpp"

using namespace rmtail;

namespace {

TruncatedWeight gaussian_weight(int N, double z, double t = 1.0, int precision = 16) {
  return {gaussian_potential(), t, N, z, precision};
}

TruncatedWeight v1_weight(int N, double z, int precision = 16) {
  return {multicritical_potential(1), 1.0, N, z, precision};
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Recurrence, GaussianFarWall) {
  const auto tab = recurrence_coefficients<double>(gaussian_weight(4, 50.0));
  ASSERT_EQ(tab.r.size(), 3u);
  ASSERT_EQ(tab.s.size(), 4u);
  for (int n = 1; n <= 3; ++n) EXPECT_NEAR(tab.r[n - 1], n / 4.0, 1e-10) << n;
  for (double s : tab.s) EXPECT_NEAR(s, 0.0, 1e-10);
  EXPECT_GE(tab.nodes, 160);
}

TEST(Recurrence, GaussianNormNoWall) {
  const auto tab = recurrence_coefficients<double>(gaussian_weight(4, kInfinity));
  EXPECT_NEAR(std::exp(tab.log_h0), std::sqrt(1 / (8 * M_PI)), 1e-13);
  EXPECT_NEAR(std::exp(tab.log_h0), 0.199471, 1e-6);
  for (double t : {0.5, 2.0}) {
    const auto other = recurrence_coefficients<double>(gaussian_weight(7, kInfinity, t));
    EXPECT_NEAR(std::exp(other.log_h0), std::sqrt(t / (2 * M_PI * 7)), 1e-13);
    for (int n = 1; n < 7; ++n) EXPECT_NEAR(other.r[n - 1], t * n / 7, 1e-12);
  }
}

TEST(Recurrence, PositivityAndOrthonormality) {
  for (double z : {-1.0, 0.0, 0.4, 1.3, 3.0}) {
    for (const auto& w : {gaussian_weight(10, z), v1_weight(10, z)}) {
      const auto tab = recurrence_coefficients<double>(w);
      EXPECT_GT(tab.log_h0, -1e300);
      for (double r : tab.r) EXPECT_GT(r, 0.0);
      EXPECT_LT(tab.max_orthonormality_residual, 1e-11);
      EXPECT_LE(tab.upper_limit, z);
    }
  }
}

TEST(Recurrence, ExtendedPrecision) {
  const auto tab = recurrence_coefficients<Float50>(gaussian_weight(6, 0.5, 1.0, 50));
  EXPECT_LT(tab.max_orthonormality_residual, 1e-45);
  const auto low = recurrence_coefficients<double>(gaussian_weight(6, 0.5));
  for (int n = 1; n < 6; ++n) EXPECT_NEAR(static_cast<double>(tab.r[n - 1]), low.r[n - 1], 1e-12);
}

TEST(GapProbability, TwoByTwoClosedForm) {
  // Weight e^{-x^2}: half-line moments sqrt(pi)/2, -1/2, sqrt(pi)/4 against
  // full-line moments sqrt(pi), 0, sqrt(pi)/2.
  const double sp = std::sqrt(M_PI);
  const double exact = std::log((sp / 2 * sp / 4 - 0.25) / (sp * sp / 2));
  EXPECT_NEAR(exact, std::log(0.25 - 1 / (2 * M_PI)), 1e-15);
  const auto g = log_gap_probability(gaussian_weight(2, 0.0));
  EXPECT_NEAR(g.logP, exact, 1e-10);
  EXPECT_EQ(g.method, GapMethod::stieltjes);
  const auto h = hankel_log_gap(gaussian_weight(2, 0.0));
  EXPECT_NEAR(h.logP, exact, 1e-10);
  EXPECT_EQ(h.method, GapMethod::hankel);
}

TEST(GapProbability, SingleEigenvalueIsErfc) {
  // N = 1: weight e^{-x^2/(2t)}, so P = Phi(z / sqrt(t)).
  for (double z : {-1.0, 0.0, 0.7, 2.0}) {
    const double exact = std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
    EXPECT_NEAR(log_gap_probability(gaussian_weight(1, z)).logP, exact, 1e-12) << z;
    EXPECT_NEAR(hankel_log_gap(gaussian_weight(1, z)).logP, exact, 1e-12) << z;
  }
}

TEST(GapProbability, FarWallIsZero) {
  for (int N = 1; N <= 10; ++N) {
    EXPECT_LT(std::abs(log_gap_probability(gaussian_weight(N, 50.0)).logP), 1e-12) << N;
    EXPECT_LT(std::abs(log_gap_probability(v1_weight(N, 50.0)).logP), 1e-12) << N;
  }
}

TEST(GapProbability, HankelFarWall) {
  for (double z : {5.0, 24.5, 50.0}) {
    EXPECT_LT(std::abs(hankel_log_gap(gaussian_weight(6, z)).logP), 1e-12) << z;
    EXPECT_LT(std::abs(hankel_log_gap(v1_weight(6, z)).logP), 1e-12) << z;
  }
}

TEST(GapProbability, EscalatesForTinyValues) {
  const auto g = log_gap_probability(gaussian_weight(4, 3.5));
  EXPECT_EQ(g.precision, 50);
  EXPECT_LT(g.logP, 0.0);
  EXPECT_LT(std::abs(g.logP), 1e-6);
  const auto coarse = log_gap_probability(gaussian_weight(4, 1.0));
  EXPECT_EQ(coarse.precision, 16);
}

TEST(GapProbability, MatchesHankelAtSixEigenvalues) {
  const auto w = gaussian_weight(6, 1.0);
  EXPECT_NEAR(log_gap_probability(w).logP, hankel_log_gap(w).logP, 1e-8);
}

TEST(GapProbability, OracleEquivalenceGrid) {
  for (int N = 2; N <= 6; ++N) {
    for (int i = 0; i < 10; ++i) {
      const double z = -1.0 + 4.0 * i / 9;
      const auto g = gaussian_weight(N, z);
      EXPECT_NEAR(log_gap_probability(g).logP, hankel_log_gap(g).logP, 1e-8) << N << " " << z;
      const auto v = v1_weight(N, z);
      EXPECT_NEAR(log_gap_probability(v).logP, hankel_log_gap(v).logP, 1e-8) << N << " " << z;
    }
  }
}

TEST(GapProbability, MonotoneInWall) {
  for (int N : {3, 10}) {
    double prev_g = -1e300, prev_v = -1e300;
    for (int i = 0; i <= 30; ++i) {
      const double z = -1.0 + 0.12 * i;
      const double g = log_gap_probability(gaussian_weight(N, z)).logP;
      const double v = log_gap_probability(v1_weight(N, z)).logP;
      EXPECT_GE(g, prev_g) << N << " " << z;
      EXPECT_GE(v, prev_v) << N << " " << z;
      EXPECT_LE(g, 1e-14);
      EXPECT_LE(v, 1e-14);
      prev_g = g;
      prev_v = v;
    }
  }
}

TEST(GapProbability, RejectsBadInput) {
  EXPECT_THROW(log_gap_probability(gaussian_weight(4, kInfinity)), domain_error);
  EXPECT_THROW(hankel_log_gap(gaussian_weight(9, 1.0)), domain_error);
  EXPECT_THROW(log_gap_probability(gaussian_weight(0, 1.0)), domain_error);
  EXPECT_THROW(log_gap_probability(gaussian_weight(4, 1.0, -1.0)), domain_error);
  EXPECT_THROW(log_gap_probability(gaussian_weight(4, 1.0, 1.0, 200)), precision_error);
}

TEST(StringResiduals, GaussianNoWall) {
  const auto w = gaussian_weight(10, kInfinity);
  const auto rep = string_residuals(w, recurrence_coefficients<double>(w));
  EXPECT_EQ(rep.rows, 8);
  EXPECT_LT(rep.free_offdiagonal, 1e-8);
  EXPECT_LT(rep.free_diagonal, 1e-8);
  EXPECT_TRUE(std::isnan(rep.integrated));
}

TEST(StringResiduals, GaussianWall) {
  const auto w = gaussian_weight(10, 1.0);
  const auto rep = string_residuals(w, recurrence_coefficients<double>(w));
  EXPECT_LT(rep.integrated, 1e-6);
}

TEST(StringResiduals, QuarticWall) {
  const auto w = v1_weight(8, 1.3);
  const auto rep = string_residuals(w, recurrence_coefficients<double>(w));
  EXPECT_EQ(rep.rows, 4);
  EXPECT_LT(rep.integrated, 1e-5);
  const auto free = v1_weight(8, kInfinity);
  const auto open = string_residuals(free, recurrence_coefficients<double>(free));
  EXPECT_LT(open.free_offdiagonal, 1e-8);
  EXPECT_LT(open.free_diagonal, 1e-8);
}

TEST(StringResiduals, DetectsCorruptedTable) {
  const auto w = gaussian_weight(10, 1.0);
  auto tab = recurrence_coefficients<double>(w);
  tab.r[2] *= 1.001;
  EXPECT_GT(string_residuals(w, tab).integrated, 1e-5);
}

TEST(WallDecoupling, ExponentialApproachToFreeCoefficients) {
  // r_1(z) - 1/10 decays like e^{-N z^2 / (2t)} times a power of z.
  std::vector<double> zsq, logdiff;
  for (int i = 0; i <= 8; ++i) {
    const double z = 3.0 + 0.25 * i;
    const auto tab = recurrence_coefficients<Float100>(gaussian_weight(10, z, 1.0, 100));
    const Float100 diff = abs(tab.r[0] - Float100(1) / 10);
    zsq.push_back(z * z);
    logdiff.push_back(static_cast<double>(log(diff)));
  }
  const double slope = fit_slope(zsq, logdiff);
  EXPECT_NEAR(slope, -10.0 / 2, 0.5);
}
