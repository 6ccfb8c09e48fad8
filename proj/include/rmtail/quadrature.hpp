#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rmtail/errors.hpp"
#include "rmtail/numeric_types.hpp"

namespace rmtail {

template <class Real>
struct QuadratureRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], Newton on the Legendre recurrence.
template <class Real>
QuadratureRule<Real> gauss_legendre(int n) {
  if (n < 1) throw domain_error("gauss_legendre: n must be positive");
  using std::abs;
  using std::cos;
  QuadratureRule<Real> rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const Real tol = eps_v<Real>() * 4;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real x = cos(pi_v<Real>() * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp(0);
    for (int it = 0; it < 100; ++it) {
      Real p0(1), p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = Real(1);
      dp = n * (x * p1 - p0) / (x * x - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) <= tol) break;
    }
    // Recompute the derivative at the converged node.
    Real p0(1), p1 = x;
    for (int k = 2; k <= n; ++k) {
      Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = Real(1);
    dp = n * (x * p1 - p0) / (x * x - 1);
    Real w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = Real(0);
  return rule;
}

/// Gauss-Legendre rule mapped to [lo, hi] and split into `panels` equal panels.
template <class Real>
QuadratureRule<Real> composite_gauss_legendre(const Real& lo, const Real& hi, int panels, int order) {
  if (panels < 1) throw domain_error("composite_gauss_legendre: need at least one panel");
  const auto base = gauss_legendre<Real>(order);
  QuadratureRule<Real> out;
  out.nodes.reserve(static_cast<std::size_t>(panels * order));
  out.weights.reserve(static_cast<std::size_t>(panels * order));
  const Real width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const Real left = lo + width * p;
    const Real half = width / 2;
    for (int i = 0; i < order; ++i) {
      out.nodes.push_back(left + half * (base.nodes[i] + 1));
      out.weights.push_back(half * base.weights[i]);
    }
  }
  return out;
}

template <class Real, class F>
Real integrate_rule(const QuadratureRule<Real>& rule, F&& f) {
  Real acc(0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
  return acc;
}

/// (1/pi) int_b^a f(s) / sqrt((s-b)(a-s)) ds by n-point Gauss-Chebyshev,
/// written in terms of center c = (a+b)/2 and radius r = (a-b)/2.
/// Exact for polynomials of degree < 2n.
template <class Real, class F>
Real chebyshev_mean(F&& f, const Real& c, const Real& r, int n) {
  using std::cos;
  Real acc(0);
  for (int j = 0; j < n; ++j) {
    const Real x = cos(pi_v<Real>() * (Real(j) + Real(0.5)) / n);
    acc += f(c + r * x, x);
  }
  return acc / n;
}

/// Adaptive 61-point Gauss-Kronrod on a finite interval, at most 12 bisection
/// levels. Integrands that vanish to high order stop there instead of chasing
/// a relative tolerance through roundoff.
template <class Real, class F>
Real integrate_adaptive(F&& f, const Real& lo, const Real& hi, Real* error_estimate = nullptr) {
  using boost::math::quadrature::gauss_kronrod;
  using std::pow;
  const Real tol = pow(eps_v<Real>(), Real(0.9));
  Real err(0);
  Real value = gauss_kronrod<Real, 61>::integrate(f, lo, hi, 12, tol, &err);
  if (error_estimate) *error_estimate = err;
  return value;
}

}  // namespace rmtail
