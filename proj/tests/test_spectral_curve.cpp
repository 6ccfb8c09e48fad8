#include <gtest/gtest.h>

#include <cmath>

#include "rmtail/spectral_curve.hpp"

using namespace rmtail;

namespace {

const double kPi = std::acos(-1.0);

RationalPolynomial double_well() {
  return RationalPolynomial{Rational(0), Rational(0), Rational(-1, 2), Rational(0), Rational(1, 4)};
}

// Plain trapezoid in theta, s = c + r cos(theta); spectrally accurate for
// smooth periodic integrands.
template <class F>
double arcsine_integral(const OneCutSolution<double>& sol, F&& f, int n = 4000) {
  const double c = (sol.a + sol.b) / 2, r = (sol.a - sol.b) / 2;
  double acc = 0;
  for (int j = 0; j < n; ++j) {
    const double th = kPi * (j + 0.5) / n;
    acc += f(c + r * std::cos(th)) * r * std::sin(th);
  }
  return acc * kPi / n;
}

double gaussian_antiderivative(double x) {
  const double root = std::sqrt(x * x - 4);
  return x / 2 * root - 2 * std::log((x + root) / 2);
}

}  // namespace

TEST(OneCut, GaussianUnitCoupling) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  EXPECT_NEAR(sol.b, -2.0, 1e-12);
  EXPECT_NEAR(sol.a, 2.0, 1e-12);
  ASSERT_EQ(sol.M.degree(), 0);
  EXPECT_NEAR(sol.M[0], 1.0, 1e-14);
}

TEST(OneCut, GaussianEndpointsScaleWithRootT) {
  for (double t : {0.25, 0.5, 3.0}) {
    const auto sol = solve_one_cut<double>(gaussian_potential(), t);
    EXPECT_NEAR(sol.a, 2 * std::sqrt(t), 1e-12);
    EXPECT_NEAR(sol.b, -2 * std::sqrt(t), 1e-12);
  }
}

TEST(OneCut, QuadraticMulticritical) {
  const auto sol = solve_one_cut<double>(multicritical_potential(0), 1.0);
  EXPECT_NEAR(sol.b, 0.0, 1e-12);
  EXPECT_NEAR(sol.a, 1.0, 1e-12);
  ASSERT_EQ(sol.M.degree(), 0);
  EXPECT_NEAR(sol.M[0], 16.0, 1e-12);
}

TEST(OneCut, FirstMulticriticalAtCriticality) {
  const auto sol = solve_one_cut<double>(multicritical_potential(1), 1.0);
  EXPECT_NEAR(sol.b, 0.0, 1e-8);
  EXPECT_NEAR(sol.a, 1.0, 1e-8);
  // M(x) = (256/5)(x-1)^2
  ASSERT_EQ(sol.M.degree(), 2);
  EXPECT_NEAR(sol.M[2], 256.0 / 5, 1e-6);
  EXPECT_NEAR(sol.M[1], -512.0 / 5, 1e-6);
  EXPECT_NEAR(sol.M[0], 256.0 / 5, 1e-6);
}

TEST(OneCut, ExtendedPrecisionCriticalEndpoints) {
  const auto sol = solve_one_cut<Float50>(multicritical_potential(1), Float50(1));
  EXPECT_LT(abs(sol.a - 1), Float50(1e-15));
  EXPECT_LT(abs(sol.b), Float50(1e-15));
}

TEST(OneCut, RejectsBadInput) {
  EXPECT_THROW(solve_one_cut<double>(gaussian_potential(), 0.0), domain_error);
  EXPECT_THROW(solve_one_cut<double>(RationalPolynomial{Rational(0), Rational(0), Rational(0), Rational(1)}, 1.0),
               domain_error);
}

TEST(OneCut, SymmetricDoubleWellAtLargeCouplingIsOneCut) {
  // Above t = 1/4... the two wells merge into a single cut around 0.
  const auto sol = solve_one_cut<double>(double_well(), 1.0);
  EXPECT_NEAR(sol.a, -sol.b, 1e-10);
}

TEST(OneCut, SymmetricDoubleWellAtSmallCouplingIsTwoCut) {
  EXPECT_THROW(solve_one_cut<double>(double_well(), 0.05), one_cut_violation);
}

TEST(OneCut, NormalizationAndLoopEquation) {
  const std::vector<RationalPolynomial> potentials{gaussian_potential(), multicritical_potential(0),
                                                   multicritical_potential(1)};
  for (const auto& V : potentials) {
    for (double t : {0.5, 1.0, 2.0}) {
      const auto sol = solve_one_cut<double>(V, t);
      const double mass = arcsine_integral(sol, [&](double s) { return density(sol, s).rho; });
      EXPECT_LT(std::abs(mass - 1), 1e-10) << to_string(V) << " t=" << t;
      for (double x : {sol.a + 0.1, sol.a + 1.0, sol.a + 5.0}) {
        const double omega = arcsine_integral(sol, [&](double s) { return density(sol, s).rho / (x - s); });
        const double dv = derivative(V).cast<double>()(x);
        EXPECT_NEAR(y_curve(sol, x), dv - 2 * t * omega, 1e-9 * (1 + std::abs(dv)));
      }
    }
  }
}

TEST(OneCut, PrincipalValueSaddleEquation) {
  for (const auto& V : {gaussian_potential(), multicritical_potential(1)}) {
    for (double t : {0.6, 1.0}) {
      const auto sol = solve_one_cut<double>(V, t);
      const auto dV = derivative(V).cast<double>();
      for (int i = 0; i < 20; ++i) {
        const double x = sol.b + (sol.a - sol.b) * (i + 0.5) / 20;
        const double rx = density(sol, x).rho;
        const double regular = arcsine_integral(sol, [&](double s) { return (density(sol, s).rho - rx) / (x - s); });
        const double pv = regular + rx * std::log((x - sol.b) / (sol.a - x));
        EXPECT_LT(std::abs(dV(x) / (2 * t) - pv), 1e-6) << "x=" << x;
      }
    }
  }
}

TEST(Density, GaussianCenterAndEdge) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  EXPECT_NEAR(density(sol, 0.0).rho, 1 / kPi, 1e-14);
  EXPECT_EQ(density(sol, 2.0).rho, 0.0);
  const auto outside = density(sol, 2.5);
  EXPECT_TRUE(outside.out_of_support);
  EXPECT_EQ(outside.rho, 0.0);
}

TEST(Density, FirstMulticriticalEdgeProfile) {
  const auto sol = solve_one_cut<double>(multicritical_potential(1), 1.0);
  const double ref = density(sol, 0.2).rho / (std::sqrt(0.2) * std::pow(0.8, 2.5));
  for (double x : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
    const double ratio = density(sol, x).rho / (std::sqrt(x) * std::pow(1 - x, 2.5));
    EXPECT_NEAR(ratio / ref, 1.0, 1e-6);
  }
}

TEST(SpectralCurve, GaussianValues) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  EXPECT_NEAR(y_curve(sol, 3.0), std::sqrt(5.0), 1e-13);
  EXPECT_EQ(y_curve(sol, 2.0), 0.0);
  EXPECT_THROW(y_curve(sol, 1.0), domain_error);
}

TEST(SpectralCurve, FirstMulticriticalEdgeBehaviour) {
  const auto sol = solve_one_cut<double>(multicritical_potential(1), 1.0);
  double prev = 0;
  for (double w : {1e-2, 1e-3, 1e-4}) {
    const double ratio = y_curve(sol, 1.0 + w) / std::pow(w, 2.5);
    EXPECT_GT(ratio, 0.0);
    if (prev > 0) EXPECT_NEAR(ratio / prev, 1.0, 0.01);
    prev = ratio;
  }
  EXPECT_NEAR(prev, 256.0 / 5, 0.1);
}

TEST(InstantonAction, GaussianAgainstAntiderivative) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  EXPECT_EQ(instanton_action(sol, 2.0).A, 0.0);
  EXPECT_NEAR(instanton_action(sol, 3.0).A, 1.429255, 1e-6);
  for (double z : {2.05, 2.5, 3.0, 4.5, 6.0})
    EXPECT_NEAR(instanton_action(sol, z).A, gaussian_antiderivative(z), 1e-12) << z;
  EXPECT_THROW(instanton_action(sol, 1.9), domain_error);
}

TEST(InstantonAction, FirstMulticriticalAgainstGaussLegendre) {
  const auto sol = solve_one_cut<double>(multicritical_potential(1), 1.0);
  // Independent: 80-point Gauss-Legendre in u = sqrt(x - 1) on the exact curve.
  const auto rule = gauss_legendre<double>(80);
  const double umax = std::sqrt(0.2);
  double ref = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = umax * (rule.nodes[i] + 1) / 2;
    const double x = 1 + u * u;
    ref += rule.weights[i] * umax / 2 * 2 * u * (256.0 / 5) * std::pow(x - 1, 2) * std::sqrt(x * (x - 1));
  }
  EXPECT_NEAR(instanton_action(sol, 1.2).A, ref, 1e-12);
}

TEST(InstantonAction, StrictlyIncreasing) {
  const auto sol = solve_one_cut<double>(multicritical_potential(1), 0.7);
  double prev = 0;
  for (int i = 1; i <= 40; ++i) {
    const double A = instanton_action(sol, sol.a + 0.05 * i).A;
    EXPECT_GT(A, prev);
    prev = A;
  }
}

TEST(Heff, ZeroOnCutPositiveOutside) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  EXPECT_EQ(heff(sol, 0.3), 0.0);
  EXPECT_NEAR(heff(sol, 3.0), gaussian_antiderivative(3.0), 1e-12);
  EXPECT_NEAR(heff(sol, -3.0), gaussian_antiderivative(3.0), 1e-12);
}

TEST(RightTail, GaussianReferenceValue) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  const double logp = right_tail_log_prob(sol, 2.2, 20);
  const double A = instanton_action(sol, 2.2).A;
  EXPECT_NEAR(A, gaussian_antiderivative(2.2), 1e-12);
  EXPECT_NEAR(logp / std::exp(-20 * A), -0.0103365, 1e-7);
  EXPECT_NEAR(logp, -9.19e-4, 0.01e-4);
}

TEST(RightTail, GaussianPrefactorReduction) {
  for (double t : {0.5, 1.0}) {
    const auto sol = solve_one_cut<double>(gaussian_potential(), t);
    for (double zt = 2.1; zt <= 5.0; zt += 0.1) {
      const double z = zt * std::sqrt(t);
      const double y = y_curve(sol, z);
      const double general = (sol.a - sol.b) / (8 * kPi * y * (z - sol.a) * (z - sol.b)) * t;
      const double gaussian = std::pow(t, 1.5) / (2 * kPi * std::pow(z * z - 4 * t, 1.5));
      EXPECT_NEAR(general / gaussian, 1.0, 1e-12);
    }
  }
}

TEST(RightTail, EdgeRefused) {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  EXPECT_THROW(right_tail_log_prob(sol, 2.0, 10), domain_error);
  EXPECT_THROW(right_tail_log_prob(sol, 3.0, 0), domain_error);
}

TEST(Landscape, SingleMinimumMatchesWallTerm) {
  const auto V = multicritical_potential(1);
  const auto sol = solve_one_cut<double>(V, 1.0);
  for (double z : {1.05, 1.2, 1.6}) {
    const auto res = right_tail_with_landscape<double>(V, 1.0, z, 10);
    ASSERT_EQ(res.terms.size(), 1u);
    EXPECT_EQ(res.dominant.value, right_tail_log_prob(sol, z, 10));
  }
  const auto g = right_tail_with_landscape<double>(gaussian_potential(), 1.0, 3.0, 10);
  EXPECT_EQ(g.terms.size(), 1u);
}

TEST(Landscape, DoubleWellTunnellingDominates) {
  OneCutOptions opts;
  opts.center_hint = -1.0;
  std::vector<double> dominant;
  for (double z : {-0.3, -0.2, -0.1}) {
    const auto res = right_tail_with_landscape<double>(double_well(), 0.05, z, 20, opts);
    ASSERT_EQ(res.terms.size(), 2u) << z;
    EXPECT_EQ(res.terms[1].kind, ActionKind::saddle);
    EXPECT_NEAR(res.terms[1].location, 1.0, 0.1);
    EXPECT_EQ(res.dominant.value, res.terms[1].log_prob) << z;
    dominant.push_back(res.dominant.value);
  }
  EXPECT_EQ(dominant[0], dominant[1]);
  EXPECT_EQ(dominant[1], dominant[2]);
}
