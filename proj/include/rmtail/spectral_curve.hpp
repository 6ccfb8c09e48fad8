#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rmtail/errors.hpp"
#include "rmtail/numeric_types.hpp"
#include "rmtail/polynomial.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/quadrature.hpp"
#include "rmtail/tail_result.hpp"

namespace rmtail {

/// Equilibrium measure on a single interval [b, a]:
/// rho(x) = M(x) sqrt((x-b)(a-x)) / (2 pi t), spectral curve
/// y(x) = M(x) sqrt((x-b)(x-a)).
template <class Real = double>
struct OneCutSolution {
  Real b{};
  Real a{};
  Real t{};
  Polynomial<Real> M;
  RationalPolynomial V;
  int newton_iterations = 0;
  bool used_continuation = false;

  Real width() const { return a - b; }
};

struct OneCutOptions {
  std::optional<double> center_hint;  ///< initial center of the cut
  int max_iterations = 4000;
  double residual_tolerance = 1e-12;
};

namespace detail {

template <class E>
struct EndpointSystem {
  Polynomial<E> dV;
  Polynomial<E> d2V;
  E t;
  int nodes;

  // G0 = <V'>, G1 = <s V'> - 2t under the arcsine measure of [b, a].
  void evaluate(const E& b, const E& a, E g[2], E jac[2][2]) const {
    const E c = (a + b) / 2, r = (a - b) / 2;
    E acc[2] = {E(0), E(0)};
    E dacc[2][2] = {{E(0), E(0)}, {E(0), E(0)}};
    using std::cos;
    for (int j = 0; j < nodes; ++j) {
      const E x = cos(pi_v<E>() * (E(j) + E(0.5)) / nodes);
      const E s = c + r * x;
      const E v1 = dV(s), v2 = d2V(s);
      const E db = (1 - x) / 2, da = (1 + x) / 2;
      acc[0] += v1;
      acc[1] += s * v1;
      dacc[0][0] += v2 * db;
      dacc[0][1] += v2 * da;
      dacc[1][0] += (v1 + s * v2) * db;
      dacc[1][1] += (v1 + s * v2) * da;
    }
    g[0] = acc[0] / nodes;
    g[1] = acc[1] / nodes - 2 * t;
    if (jac) {
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) jac[i][k] = dacc[i][k] / nodes;
    }
  }

  E norm(const E& b, const E& a) const {
    E g[2];
    evaluate(b, a, g, nullptr);
    using std::abs;
    return abs(g[0]) + abs(g[1]);
  }
};

/// Damped Newton on the endpoint conditions. Returns the final residual.
template <class E>
E newton_endpoints(const EndpointSystem<E>& sys, E& b, E& a, int max_iterations, int& iterations) {
  using std::abs;
  E res = sys.norm(b, a);
  const E floor = eps_v<E>() * 100 * (1 + abs(sys.t));
  for (iterations = 0; iterations < max_iterations && res > floor; ++iterations) {
    E g[2], J[2][2];
    sys.evaluate(b, a, g, J);
    const E det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0) break;
    const E step_b = (g[0] * J[1][1] - g[1] * J[0][1]) / det;
    const E step_a = (J[0][0] * g[1] - J[1][0] * g[0]) / det;
    E lambda(1);
    bool accepted = false;
    for (int half = 0; half < 60; ++half, lambda /= 2) {
      const E nb = b - lambda * step_b, na = a - lambda * step_a;
      if (!(na > nb)) continue;
      const E nres = sys.norm(nb, na);
      if (nres < res) {
        b = nb;
        a = na;
        res = nres;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return res;
}

/// Polynomial part of V'(x)/sqrt((x-a)(x-b)).
template <class E>
Polynomial<E> polynomial_part(const Polynomial<E>& dV, const E& b, const E& a) {
  const int d = dV.degree();
  if (d < 1) return {};
  const E sigma = a + b, prod = a * b;
  std::vector<E> g(static_cast<std::size_t>(d) + 1, E(0));
  g[0] = E(1);
  if (d >= 1) g[1] = sigma / 2;
  for (int k = 1; k + 1 <= d; ++k)
    g[k + 1] = (sigma * (E(k) + E(0.5)) * g[k] - prod * k * g[k - 1]) / (k + 1);
  std::vector<E> m(static_cast<std::size_t>(d), E(0));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j <= d; ++j) m[i] += dV[j] * g[j - i - 1];
  return Polynomial<E>(std::move(m));
}

}  // namespace detail

/// Solves the one-cut endpoint conditions for weight e^{-(N/t) V}.
///
/// Newton runs in at least 50-digit arithmetic so that critical potentials
/// (where the Jacobian is singular at the solution) still converge. If the
/// direct solve fails, the solution is continued in t from t/1000.
template <class Real = double>
OneCutSolution<Real> solve_one_cut(const RationalPolynomial& V, const Real& t, const OneCutOptions& options = {}) {
  using E = extended_t<Real>;
  using std::abs;
  using std::pow;
  using std::sqrt;
  if (V.degree() < 2 || V.degree() % 2 != 0 || V.leading() <= 0)
    throw domain_error("solve_one_cut: V needs even degree >= 2 and positive leading coefficient");
  if (!(t > 0)) throw domain_error("solve_one_cut: t must be positive");

  const E te = real_cast<E>(t);
  detail::EndpointSystem<E> sys{derivative(V).template cast<E>(), derivative(derivative(V)).template cast<E>(), te,
                                V.degree() + 2};

  // Initial cut: around the real minima, widened by the local quadratic radius.
  double center = 0.0, spread = 0.0, curvature = 0.0;
  const auto d2V = derivative(derivative(V)).cast<double>();
  if (options.center_hint) {
    center = *options.center_hint;
    curvature = d2V(center);
  } else {
    const auto saddles = saddle_points(V);
    const auto& minima = saddles.real_minima;
    for (const auto& m : minima) center += m.x;
    center /= static_cast<double>(minima.size());
    spread = (minima.back().x - minima.front().x) / 2;
    curvature = std::min(d2V(minima.front().x), d2V(minima.back().x));
  }
  if (!(curvature > 0)) curvature = 1.0;

  auto guess = [&](const E& tt, E& b, E& a) {
    const E r = E(spread) + 2 * sqrt(tt / E(curvature));
    b = E(center) - r;
    a = E(center) + r;
  };

  const E accept = E(options.residual_tolerance) * (1 + te);
  E b, a;
  guess(te, b, a);
  int iterations = 0;
  E res = detail::newton_endpoints(sys, b, a, options.max_iterations, iterations);
  bool continued = false;

  if (!(res < accept)) {
    continued = true;
    E tcur = te / 1000;
    guess(tcur, b, a);
    sys.t = tcur;
    int it = 0;
    if (!(detail::newton_endpoints(sys, b, a, options.max_iterations, it) < E(options.residual_tolerance) * (1 + tcur)))
      throw numerical_error("solve_one_cut: Newton diverged even at t/1000; the potential may not be one-cut");
    const E ratio = pow(E(1000), E(1) / 10);
    int halvings = 0;
    while (tcur < te) {
      E factor = ratio;
      for (;;) {
        E tnext = tcur * factor;
        if (tnext > te) tnext = te;
        E nb = b, na = a;
        sys.t = tnext;
        if (detail::newton_endpoints(sys, nb, na, options.max_iterations, it) <
            E(options.residual_tolerance) * (1 + tnext)) {
          b = nb;
          a = na;
          tcur = tnext;
          break;
        }
        factor = sqrt(factor);
        if (++halvings > 40) {
          std::ostringstream os;
          os << "solve_one_cut: t-continuation stalled at t=" << static_cast<double>(tcur);
          throw numerical_error(os.str());
        }
      }
    }
    sys.t = te;
    res = detail::newton_endpoints(sys, b, a, options.max_iterations, iterations);
    if (!(res < accept)) {
      std::ostringstream os;
      os << "solve_one_cut: endpoint residual " << static_cast<double>(res) << " after continuation";
      throw numerical_error(os.str());
    }
  }

  const auto Me = detail::polynomial_part(sys.dV, b, a);

  // Interior positivity of M; a sign change means the support splits.
  E mmax(0);
  std::vector<E> samples;
  for (int i = 0; i < 64; ++i) {
    const E x = b + (a - b) * (E(i) + E(0.5)) / 64;
    samples.push_back(Me(x));
    mmax = std::max(mmax, abs(samples.back()));
  }
  const E slack = mmax * E(1e-9);
  for (const auto& v : samples)
    if (v <= 0) throw one_cut_violation("one-cut assumption violated: M(x) <= 0 inside the support");
  if (Me(b) < -slack || Me(a) < -slack)
    throw one_cut_violation("one-cut assumption violated: M(x) < 0 at a support endpoint");

  OneCutSolution<Real> sol;
  sol.b = real_cast<Real>(b);
  sol.a = real_cast<Real>(a);
  sol.t = t;
  sol.M = Me.template cast<Real>();
  sol.V = V;
  sol.newton_iterations = iterations;
  sol.used_continuation = continued;
  return sol;
}

/// Density value with an out-of-support flag.
template <class Real>
struct DensityPoint {
  Real rho{};
  bool out_of_support = false;
};

template <class Real>
DensityPoint<Real> density(const OneCutSolution<Real>& sol, const Real& x) {
  using std::sqrt;
  if (x < sol.b || x > sol.a) return {Real(0), true};
  return {sol.M(x) * sqrt((x - sol.b) * (sol.a - x)) / (2 * pi_v<Real>() * sol.t), false};
}

template <class Real>
Real y_curve(const OneCutSolution<Real>& sol, const Real& x) {
  using std::sqrt;
  if (x < sol.a) throw domain_error("y_curve: x must be >= a");
  return sol.M(x) * sqrt((x - sol.b) * (x - sol.a));
}

/// d y / dx for x > a.
template <class Real>
Real y_curve_derivative(const OneCutSolution<Real>& sol, const Real& x) {
  using std::sqrt;
  if (!(x > sol.a)) throw domain_error("y_curve_derivative: x must be > a");
  const Real root = sqrt((x - sol.b) * (x - sol.a));
  return derivative(sol.M)(x) * root + sol.M(x) * (2 * x - sol.a - sol.b) / (2 * root);
}

enum class ActionKind { wall, saddle };

template <class Real>
struct EffectiveAction {
  Real A{};
  Real upper{};
  ActionKind kind = ActionKind::wall;
};

/// A = int_a^upper y(x) dx with x = a + u^2 removing the square-root edge.
template <class Real>
EffectiveAction<Real> instanton_action(const OneCutSolution<Real>& sol, const Real& upper,
                                       ActionKind kind = ActionKind::wall) {
  using std::sqrt;
  if (upper < sol.a) throw domain_error("instanton_action: upper limit below the support edge a");
  // Within eps * width of the edge A = O(eps^{3/2}), below working precision.
  if (upper - sol.a <= eps_v<Real>() * sol.width()) return {Real(0), upper, kind};
  const Real umax = sqrt(upper - sol.a);
  auto integrand = [&](const Real& u) {
    const Real x = sol.a + u * u;
    return 2 * u * u * sol.M(x) * sqrt(x - sol.b);
  };
  return {integrate_adaptive<Real>(integrand, Real(0), umax), upper, kind};
}

/// Holomorphic effective potential relative to the cut: zero on [b, a],
/// int_a^x y for x > a, int_x^b |y| for x < b.
template <class Real>
Real heff(const OneCutSolution<Real>& sol, const Real& x) {
  using std::sqrt;
  if (x >= sol.b && x <= sol.a) return Real(0);
  if (x > sol.a) return instanton_action(sol, x).A;
  if (sol.b - x <= eps_v<Real>() * sol.width()) return Real(0);
  const Real umax = sqrt(sol.b - x);
  auto integrand = [&](const Real& u) {
    const Real s = sol.b - u * u;
    return 2 * u * u * sol.M(s) * sqrt(sol.a - s);
  };
  return integrate_adaptive<Real>(integrand, Real(0), umax);
}

/// Leading right-tail log probability with the hard-wall prefactor:
/// log P = -[g (a-b) / (8 pi y(z)(z-a)(z-b))] exp(-A(z)/g), g = t/N.
template <class Real>
Real right_tail_log_prob(const OneCutSolution<Real>& sol, const Real& z, int N, double edge_delta = 1e-6) {
  using std::exp;
  if (N < 1) throw domain_error("right_tail_log_prob: N must be positive");
  if (!(z > sol.a + Real(edge_delta) * sol.width()))
    throw domain_error("right_tail_log_prob: prefactor divergent near edge (z too close to a)");
  const Real gs = sol.t / N;
  const Real A = instanton_action(sol, z).A;
  const Real y = y_curve(sol, z);
  const Real pref = gs * (sol.a - sol.b) / (8 * pi_v<Real>() * y * (z - sol.a) * (z - sol.b));
  return -pref * exp(-A / gs);
}

struct LandscapeTerm {
  ActionKind kind = ActionKind::wall;
  double location = 0.0;  ///< z for the wall, x_p for a saddle
  double action = 0.0;
  double log_prob = 0.0;  ///< signed contribution to log P
};

struct LandscapeResult {
  TailResult dominant;
  std::vector<LandscapeTerm> terms;
};

/// Minima of V_heff beyond the cut: real roots of M right of a where M turns
/// from negative to positive.
template <class Real>
std::vector<Real> heff_minima(const OneCutSolution<Real>& sol) {
  std::vector<Real> out;
  if (sol.M.degree() < 1) return out;
  std::vector<Rational> exact;
  for (const auto& c : sol.M.coeffs()) exact.push_back(Rational(static_cast<double>(c)));
  const auto dM = derivative(sol.M);
  for (double x : numeric_real_roots(RationalPolynomial(exact))) {
    const Real xr(x);
    if (xr > sol.a && dM(xr) > 0) out.push_back(xr);
  }
  return out;
}

/// Wall term plus one tunnelling term per V_heff minimum beyond z. The
/// dominant term is the one with the largest |log P|.
template <class Real = double>
LandscapeResult right_tail_with_landscape(const RationalPolynomial& V, const Real& t, const Real& z, int N,
                                          const OneCutOptions& options = {}) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const auto sol = solve_one_cut<Real>(V, t, options);
  LandscapeResult out;
  const Real wall = right_tail_log_prob(sol, z, N);
  out.terms.push_back({ActionKind::wall, static_cast<double>(z), static_cast<double>(instanton_action(sol, z).A),
                       static_cast<double>(wall)});
  const Real gs = t / N;
  for (const Real& xp : heff_minima(sol)) {
    if (!(xp > z)) continue;
    const Real A = instanton_action(sol, xp, ActionKind::saddle).A;
    const Real curvature = y_curve_derivative(sol, xp);
    const Real phi1 = -log((xp - sol.a) * (xp - sol.b));
    const Real g1 = log((sol.a - sol.b) / 4);
    const Real term = -sqrt(gs / (2 * pi_v<Real>() * curvature)) * exp(phi1 + g1) * exp(-A / gs);
    out.terms.push_back(
        {ActionKind::saddle, static_cast<double>(xp), static_cast<double>(A), static_cast<double>(term)});
  }
  const auto dom = std::max_element(out.terms.begin(), out.terms.end(), [](const auto& l, const auto& r) {
    return std::abs(l.log_prob) < std::abs(r.log_prob);
  });
  out.dominant = {dom->log_prob, Method::spectral_curve, Order::leading_N, false};
  return out;
}

}  // namespace rmtail
