#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/log1p.hpp>

#include "rmtail/errors.hpp"
#include "rmtail/numeric_types.hpp"
#include "rmtail/polynomial.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/quadrature.hpp"
#include "rmtail/spectral_curve.hpp"
#include "rmtail/tail_result.hpp"

namespace rmtail {

// ---------------------------------------------------------------------------
// Gaussian closed forms
// ---------------------------------------------------------------------------

namespace detail {

/// acosh(1 + e) without cancellation for small e.
template <class Real>
Real acosh1p(const Real& e) {
  using std::sqrt;
  return boost::math::log1p(e + sqrt(e * (2 + e)));
}

/// z + sqrt(z^2 + c) for c > 0, stable for negative z.
template <class Real>
Real plus_root(const Real& z, const Real& c) {
  using std::sqrt;
  const Real root = sqrt(z * z + c);
  return z >= 0 ? z + root : c / (root - z);
}

}  // namespace detail

/// Left rate function for weight e^{-N x^2}; zero (flagged) right of sqrt(2).
template <class Real = double>
TailResult psi_minus(const Real& z) {
  using std::log;
  using std::sqrt;
  const Real edge = sqrt(Real(2));
  if (z > edge) return {0.0, Method::closed_form, Order::leading_N2, true};
  const Real z2 = z * z;
  const Real value = z2 / 3 - z2 * z2 / 108 - sqrt(z2 + 6) * (z2 * z + 15 * z) / 108 -
                     log(detail::plus_root(z, Real(6)) / edge) / 2 + log(Real(3)) / 2;
  return {static_cast<double>(value), Method::closed_form, Order::leading_N2, false};
}

/// Right rate function for weight e^{-N x^2}.
template <class Real = double>
Real psi_plus(const Real& z) {
  using std::log;
  using std::sqrt;
  const Real edge = sqrt(Real(2));
  if (z < edge) throw domain_error("psi_plus: z must be >= sqrt(2)");
  const Real root = sqrt(z * z - 2);
  // z - root written as 2 / (z + root).
  return z * root / 2 + log(2 / (z + root) / edge);
}

/// g_s^2 F^(0)(z; t) for V = x^2/2; zero for z >= 2 sqrt(t).
template <class Real = double>
Real gaussian_left_F(const Real& z, const Real& t) {
  using std::log;
  using std::sqrt;
  if (!(t > 0)) throw domain_error("gaussian_left_F: t must be positive");
  if (z >= 2 * sqrt(t)) return Real(0);
  const Real z2 = z * z;
  const Real root = sqrt(z2 + 12 * t);
  return -t * z2 / 3 + z2 * z2 / 216 + z / 216 * (z2 + 30 * t) * root +
         t * t * log(detail::plus_root(z, 12 * t) / (6 * sqrt(t)));
}

/// Right-tail action A(t; z) for V = x^2/2.
template <class Real = double>
Real gaussian_action(const Real& t, const Real& z) {
  using std::sqrt;
  if (!(t > 0)) throw domain_error("gaussian_action: t must be positive");
  if (z < 2 * sqrt(t)) throw domain_error("gaussian_action: z must be >= 2 sqrt(t)");
  const Real e = z * z / (2 * t) - 2;
  return z * sqrt(z * z - 4 * t) / 2 - t * detail::acosh1p(e);
}

// ---------------------------------------------------------------------------
// First multi-critical potential
// ---------------------------------------------------------------------------

/// Closed-form action for V_1 in terms of the endpoints (b, a) of the cut.
template <class Real>
Real multicritical_action_ab(const Real& a, const Real& b, const Real& z) {
  using std::sqrt;
  if (z < a) throw domain_error("multicritical_action: z must be >= a");
  if (z == a) return Real(0);
  const Real poly = 45 * a * a * a + 45 * b * b * b + 3 * a * a * (-40 + 9 * b - 6 * z) - 6 * b * b * (20 + 3 * z) +
                    b * (90 + 80 * z - 24 * z * z) - 4 * z * (45 - 40 * z + 12 * z * z) +
                    a * (90 + 27 * b * b + 80 * z - 24 * z * z - 4 * b * (20 + 3 * z));
  const Real quad = 15 * a * a + 2 * a * (-20 + 9 * b) + 5 * (6 - 8 * b + 3 * b * b);
  // ArcCosh[(2z - a - b)/(a - b)] = acosh(1 + 2(z - a)/(a - b))
  const Real arc = detail::acosh1p(2 * (z - a) / (a - b));
  return Real(2) / 15 * (-2 * sqrt((a - z) * (b - z)) * poly - 3 * (a - b) * (a - b) * quad * arc);
}

template <class Real>
Real multicritical_action(const OneCutSolution<Real>& sol, const Real& z) {
  if (!(sol.V == multicritical_potential(1)))
    throw domain_error("multicritical_action: solution must be built from V_1");
  return multicritical_action_ab(sol.a, sol.b, z);
}

// ---------------------------------------------------------------------------
// General left tail from the planar hard-wall solution
// ---------------------------------------------------------------------------

/// Planar recurrence data at index parameter zeta with the wall at z.
template <class Real = double>
struct LeftTailPlanarState {
  Real zeta{};
  Real R{};
  Real S{};
  Real b_soft{};
  Real b_free{};  ///< unconstrained endpoints at zeta
  Real a_free{};
  bool wall_active = false;
};

namespace detail {

/// Coefficient of 1/x in V'(x) sqrt((x - z)/(x - bt)) and its bt-derivative.
template <class E>
E constrained_moment(const Polynomial<E>& dV, const E& z, const E& bt, E* derivative_out) {
  const int d = dV.degree();
  const int m = d + 2;
  std::vector<E> alpha(m), gamma(m), beta(m), dbeta(m);
  alpha[0] = E(1);
  gamma[0] = E(1);
  for (int i = 0; i + 1 < m; ++i) {
    alpha[i + 1] = alpha[i] * (E(0.5) - i) / (i + 1) * (-z);
    gamma[i + 1] = gamma[i] * (2 * i + 1) / (2 * i + 2);
  }
  E power(1), previous(0);
  for (int k = 0; k < m; ++k) {
    beta[k] = gamma[k] * power;
    dbeta[k] = gamma[k] * k * previous;
    previous = power;
    power *= bt;
  }
  E c(0), dc(0);
  for (int j = 0; j <= d; ++j) {
    const int order = j + 1;
    E q(0), dq(0);
    for (int k = 0; k <= order; ++k) {
      q += alpha[order - k] * beta[k];
      dq += alpha[order - k] * dbeta[k];
    }
    c += dV[j] * q;
    dc += dV[j] * dq;
  }
  if (derivative_out) *derivative_out = dc;
  return c;
}

/// Soft edge bt < z of the density supported on [bt, z] with a hard edge at
/// z, unit mass at coupling zeta.
template <class E>
E solve_soft_edge(const Polynomial<E>& dV, const E& z, const E& zeta, E start) {
  using std::abs;
  E bt = start;
  E dc;
  E f = constrained_moment(dV, z, bt, &dc) - 2 * zeta;
  const E tol = eps_v<E>() * 1000 * (1 + abs(zeta));
  for (int it = 0; it < 200 && abs(f) > tol; ++it) {
    if (dc == 0) break;
    const E step = f / dc;
    E lambda(1);
    bool accepted = false;
    for (int half = 0; half < 60; ++half, lambda /= 2) {
      const E nb = bt - lambda * step;
      if (!(nb < z)) continue;
      E ndc;
      const E nf = constrained_moment(dV, z, nb, &ndc) - 2 * zeta;
      if (abs(nf) < abs(f)) {
        bt = nb;
        f = nf;
        dc = ndc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(abs(f) < E(1e-12) * (1 + abs(zeta)))) {
    std::ostringstream os;
    os << "constrained planar solver did not converge at zeta=" << static_cast<double>(zeta)
       << " (residual " << static_cast<double>(abs(f)) << ")";
    throw numerical_error(os.str());
  }
  return bt;
}

/// Lower endpoint b with G0(b, a) = 0 for fixed a, plus the data needed for
/// zeta(a) = G1/2 and its derivative.
template <class E>
struct FreeEdgeData {
  E b;
  E zeta;
  E dzeta_da;
};

template <class E>
FreeEdgeData<E> free_edge_for_upper(const EndpointSystem<E>& sys, const E& a, E b) {
  using std::abs;
  E g[2], J[2][2];
  for (int it = 0; it < 200; ++it) {
    sys.evaluate(b, a, g, J);
    if (abs(g[0]) < eps_v<E>() * 1000) break;
    E step = g[0] / J[0][0];
    E lambda(1);
    bool accepted = false;
    for (int half = 0; half < 60; ++half, lambda /= 2) {
      const E nb = b - lambda * step;
      if (!(nb < a)) continue;
      E ng[2];
      sys.evaluate(nb, a, ng, nullptr);
      if (abs(ng[0]) < abs(g[0])) {
        b = nb;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  sys.evaluate(b, a, g, J);
  if (!(abs(g[0]) < E(1e-12)))
    throw numerical_error("left tail: unconstrained edge continuation failed");
  const E db_da = -J[0][1] / J[0][0];
  // sys.t is zero, so g[1] is the raw first moment 2 zeta.
  return {b, g[1] / 2, (J[1][1] + J[1][0] * db_da) / 2};
}

template <class E>
struct LeftTailRun {
  E value;
  std::vector<LeftTailPlanarState<E>> states;
};

/// Start for the soft-edge Newton: the constrained edge lies below both the
/// free edge b and the wall z.
template <class E>
E soft_edge_start(const E& b, const E& a, const E& z) {
  return (b < z ? b : z) - (a - b) * E(1e-3);
}

/// Real minimum of V that the cut shrinks onto as the coupling goes to 0.
template <class E>
E shrinking_center(const RationalPolynomial& V, const E& b, const E& a) {
  std::vector<double> inside;
  for (const auto& m : saddle_points(V).real_minima)
    if (E(m.x) > b && E(m.x) < a) inside.push_back(m.x);
  if (inside.size() != 1)
    throw numerical_error("left tail: the support must contain exactly one real minimum of V");
  const auto dV = derivative(V).template cast<E>();
  const auto d2V = derivative(dV);
  E x(inside.front());
  for (int it = 0; it < 8; ++it) x -= dV(x) / d2V(x);
  return x;
}

template <class E>
LeftTailRun<E> left_tail_run(const RationalPolynomial& V, const E& t, const E& z, int nodes) {
  using std::log;
  using std::sqrt;
  const auto sol = solve_one_cut<E>(V, t);
  LeftTailRun<E> run{E(0), {}};
  if (z >= sol.a) return run;
  if (z <= sol.b) throw domain_error("left_tail_general: z must lie inside the support (b, a)");

  EndpointSystem<E> sys{derivative(V).template cast<E>(), derivative(derivative(V)).template cast<E>(), E(0),
                        V.degree() + 2};
  const auto rule = gauss_legendre<E>(nodes);
  const E center = shrinking_center(V, sol.b, sol.a);

  if (z > center) {
    // The wall switches on at zeta_c where a(zeta_c) = z. Integrate over the
    // free upper edge a in [z, a(t)], walking down from a(t).
    const E half = (sol.a - z) / 2, mid = (sol.a + z) / 2;
    E b = sol.b, bt = soft_edge_start(sol.b, sol.a, z);
    for (int i = nodes - 1; i >= 0; --i) {
      const E a = mid + half * rule.nodes[i];
      const auto free = free_edge_for_upper(sys, a, b);
      b = free.b;
      bt = solve_soft_edge(sys.dV, z, free.zeta, bt < soft_edge_start(b, a, z) ? bt : soft_edge_start(b, a, z));
      const E r_free = (a - b) * (a - b) / 16;
      const E r_wall = (z - bt) * (z - bt) / 16;
      run.value += rule.weights[i] * half * (t - free.zeta) * log(r_wall / r_free) * free.dzeta_da;
      run.states.push_back({free.zeta, r_wall, (z + bt) / 2, bt, b, a, true});
    }
    return run;
  }

  // Wall below the well: active for every zeta in (0, t]. zeta = t u^3
  // tames the logarithmic end point at zeta = 0.
  const E curvature = derivative(derivative(V)).template cast<E>()(center);
  E b = sol.b, a = sol.a, bt = soft_edge_start(sol.b, sol.a, z);
  for (int i = nodes - 1; i >= 0; --i) {
    const E u = (rule.nodes[i] + 1) / 2;
    const E zeta = t * u * u * u;
    sys.t = zeta;
    E wb = b, wa = a;
    const E r0 = 2 * sqrt(zeta / curvature);
    E qb = center - r0, qa = center + r0;
    if (sys.norm(qb, qa) < sys.norm(wb, wa)) {
      wb = qb;
      wa = qa;
    }
    int iterations = 0;
    if (newton_endpoints(sys, wb, wa, 4000, iterations) < E(1e-12) * (1 + zeta)) {
      b = wb;
      a = wa;
    } else {
      OneCutOptions opts;
      opts.center_hint = static_cast<double>(center);
      const auto fresh = solve_one_cut<E>(V, zeta, opts);
      b = fresh.b;
      a = fresh.a;
    }
    bt = solve_soft_edge(sys.dV, z, zeta, bt);
    const E r_free = (a - b) * (a - b) / 16;
    const E r_wall = (z - bt) * (z - bt) / 16;
    run.value += rule.weights[i] / 2 * 3 * t * u * u * (t - zeta) * log(r_wall / r_free);
    run.states.push_back({zeta, r_wall, (z + bt) / 2, bt, b, a, true});
  }
  // N log(h0(z)/h0(inf)) is of order N^2 once the wall cuts off the well.
  const auto Ve = V.template cast<E>();
  run.value -= t * (Ve(z) - Ve(center));
  return run;
}

}  // namespace detail

/// Planar state at a single zeta; the wall is inactive when a(zeta) <= z.
template <class Real = double>
LeftTailPlanarState<Real> planar_state(const RationalPolynomial& V, const Real& zeta, const Real& z) {
  using E = extended_t<Real>;
  const auto sol = solve_one_cut<E>(V, real_cast<E>(zeta));
  LeftTailPlanarState<Real> st;
  st.zeta = zeta;
  st.b_free = real_cast<Real>(sol.b);
  st.a_free = real_cast<Real>(sol.a);
  const E ze = real_cast<E>(z);
  if (ze >= sol.a) {
    st.R = real_cast<Real>((sol.a - sol.b) * (sol.a - sol.b) / 16);
    st.S = real_cast<Real>((sol.a + sol.b) / 2);
    st.b_soft = st.b_free;
    return st;
  }
  const auto dV = derivative(V).template cast<E>();
  const E bt = detail::solve_soft_edge(dV, ze, real_cast<E>(zeta), detail::soft_edge_start(sol.b, sol.a, ze));
  st.R = real_cast<Real>((ze - bt) * (ze - bt) / 16);
  st.S = real_cast<Real>((ze + bt) / 2);
  st.b_soft = real_cast<Real>(bt);
  st.wall_active = true;
  return st;
}

/// g_s^2 F^(0)(z; t) = int_{zeta_c}^t (t - zeta) log(R(zeta, z)/R(zeta, inf)) dzeta.
///
/// The integral is taken over the free upper edge a in [z, a(t)] rather than
/// over zeta directly; zeta(a) is smooth where a(zeta) is not.
inline TailResult left_tail_general(const RationalPolynomial& V, double t, double z, int nodes = 48) {
  if (!(t > 0)) throw domain_error("left_tail_general: t must be positive");
  const auto run = detail::left_tail_run<Float50>(V, Float50(t), Float50(z), nodes);
  const bool outside = run.states.empty();
  return {static_cast<double>(run.value), Method::planar_solver, Order::leading_N2, outside};
}

/// The constrained planar states at the quadrature nodes of left_tail_general.
template <class Real = double>
std::vector<LeftTailPlanarState<Real>> left_tail_states(const RationalPolynomial& V, const Real& t, const Real& z,
                                                        int nodes = 48) {
  using E = extended_t<Real>;
  const auto run = detail::left_tail_run<E>(V, real_cast<E>(t), real_cast<E>(z), nodes);
  std::vector<LeftTailPlanarState<Real>> out;
  for (const auto& s : run.states)
    out.push_back({real_cast<Real>(s.zeta), real_cast<Real>(s.R), real_cast<Real>(s.S), real_cast<Real>(s.b_soft),
                   real_cast<Real>(s.b_free), real_cast<Real>(s.a_free), s.wall_active});
  return out;
}

/// Left-hand side minus right-hand side of the first integrated k=1 string
/// equation.
template <class Real>
Real k1_planar_residual1(const Real& R, const Real& S, const Real& z, const Real& zeta) {
  const Real S2 = S * S, S3 = S2 * S, S4 = S3 * S;
  const Real body = 60 * R + 96 * R * R - 5 * S - 240 * R * S + 30 * S2 + 192 * R * S2 - 40 * S3 + 16 * S4 + 5 * z +
                    80 * R * z - 30 * S * z - 96 * R * S * z + 40 * S2 * z - 16 * S3 * z;
  return Real(16) / 5 * body - 2 * zeta;
}

template <class Real>
Real k1_planar_potential2(const Real& R, const Real& S, const Real& z) {
  const Real S2 = S * S;
  return Real(16) / 5 *
         (-5 * R - 120 * R * R + 60 * R * S + 192 * R * R * S - 120 * R * S2 + 64 * R * S2 * S - 30 * R * z -
          48 * R * R * z + 80 * R * S * z - 48 * R * S2 * z);
}

template <class Real>
struct K1Residuals {
  Real first{};
  Real second{};
};

/// Residuals of both k=1 planar string equations at a state. The zeta
/// derivative in the second is a central difference with step h, with the
/// neighbouring states re-solved.
template <class Real>
K1Residuals<Real> k1_string_residuals(const LeftTailPlanarState<Real>& state, const Real& z, double h = 1e-6) {
  using std::abs;
  const auto V1 = multicritical_potential(1);
  K1Residuals<Real> out;
  out.first = abs(k1_planar_residual1(state.R, state.S, z, state.zeta));
  const auto up = planar_state<Real>(V1, state.zeta + Real(h), z);
  const auto down = planar_state<Real>(V1, state.zeta - Real(h), z);
  const Real deriv = (k1_planar_potential2(up.R, up.S, z) - k1_planar_potential2(down.R, down.S, z)) / (2 * Real(h));
  out.second = abs(deriv - (state.S - z));
  return out;
}

/// Residual of the k=1 relation between S(zeta) and dA/dS, with S from the
/// free planar solution (z right of a(zeta)) and A from the closed form.
template <class Real = double>
Real k1_action_relation_residual(const Real& zeta, const Real& z, double h = 1e-5) {
  using E = extended_t<Real>;
  using std::abs;
  using std::cosh;
  const auto V1 = multicritical_potential(1);
  auto eval = [&](const E& zz) {
    const auto sol = solve_one_cut<E>(V1, zz);
    return std::pair{(sol.a + sol.b) / 2, multicritical_action_ab(sol.a, sol.b, real_cast<E>(z))};
  };
  const E ze = real_cast<E>(z);
  const E S = eval(real_cast<E>(zeta)).first;
  const auto [Sp, Ap] = eval(real_cast<E>(zeta) + E(h));
  const auto [Sm, Am] = eval(real_cast<E>(zeta) - E(h));
  const E dA_dS = (Ap - Am) / (Sp - Sm);
  const E S2 = S * S, S3 = S2 * S, S4 = S3 * S;
  const E arg = pow(6 * S - 5, 3) * dA_dS /
                (16 * (2 * S - 1) * (2 * S - 1) * (305 - 1180 * S + 1740 * S2 - 1152 * S3 + 288 * S4));
  const E lhs = -5 + 30 * S - 80 * S2 + 64 * S3 + 80 * S * ze - 96 * S2 * ze - 40 * ze * ze + 48 * S * ze * ze +
                (-5 + 30 * S - 40 * S2 + 16 * S3) * cosh(arg);
  return real_cast<Real>(abs(lhs));
}

// ---------------------------------------------------------------------------
// Edge scaling
// ---------------------------------------------------------------------------

enum class EdgeSide { left, right };

/// Least-squares slope of ln|f(a -+ w)| against ln w on a geometric grid.
inline double edge_exponent(const std::function<double(double)>& f, double a, EdgeSide side, double w_min = 1e-4,
                            double w_max = 1e-2, int points = 12) {
  if (points < 12) throw domain_error("edge_exponent: at least 12 grid points required");
  std::vector<double> xs, ys;
  for (int i = 0; i < points; ++i) {
    const double w = w_min * std::pow(w_max / w_min, static_cast<double>(i) / (points - 1));
    const double v = f(side == EdgeSide::left ? a - w : a + w);
    if (v == 0.0 || !std::isfinite(v)) continue;
    xs.push_back(std::log(w));
    ys.push_back(std::log(std::abs(v)));
  }
  if (xs.size() < 3) throw numerical_error("edge_exponent: function vanishes on the fitting grid");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace rmtail
