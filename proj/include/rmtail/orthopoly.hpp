#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "rmtail/errors.hpp"
#include "rmtail/numeric_types.hpp"
#include "rmtail/polynomial.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/quadrature.hpp"

namespace rmtail {

/// Weight e^{-(N/t) V(x)} / (2 pi) on (-inf, z].
struct TruncatedWeight {
  RationalPolynomial V;
  double t = 1.0;
  int N = 1;
  double z = kInfinity;
  int precision = 16;  ///< decimal digits for internal arithmetic

  void validate() const {
    if (V.degree() < 2 || V.degree() % 2 != 0 || V.leading() <= 0)
      throw domain_error("weight needs even degree >= 2 and positive leading coefficient");
    if (!(t > 0)) throw domain_error("coupling t must be positive");
    if (N < 1) throw domain_error("N must be >= 1");
    if (std::isnan(z)) throw domain_error("wall position is NaN");
  }
};

template <class Real>
struct RecurrenceTable {
  Real log_h0{};
  std::vector<Real> r;  ///< r_1 .. r_{N-1}
  std::vector<Real> s;  ///< s_0 .. s_{N-1}
  double max_orthonormality_residual = 0.0;
  double lower_cutoff = 0.0;  ///< integration runs over [lower_cutoff, upper_limit]
  double upper_limit = 0.0;
  int nodes = 0;

  /// log Z_N up to N-independent constants: sum_{n<N} log h_n.
  Real log_partition(int N) const {
    using std::log;
    Real acc = N * log_h0;
    for (int i = 1; i < N; ++i) acc += (N - i) * log(r[i - 1]);
    return acc;
  }
};

enum class GapMethod { stieltjes, hankel };

inline std::string to_string(GapMethod m) { return m == GapMethod::stieltjes ? "stieltjes" : "hankel"; }

struct GapResult {
  double logP = 0.0;
  double z = 0.0;
  double t = 0.0;
  int N = 0;
  GapMethod method = GapMethod::stieltjes;
  int precision = 16;
};

namespace detail {

/// Integration window for the weight restricted to (-inf, z]: where the
/// weight, times the growth of degree-2N polynomials, drops below
/// 10^{-(precision+5)} of its peak.
struct Window {
  double lo;
  double hi;
  double vmin;
};

inline Window integration_window(const TruncatedWeight& w) {
  const auto Vd = w.V.cast<double>();
  const double target = (w.precision + 5) * std::log(10.0);
  const double scale = w.N / w.t;

  // Peak of the weight on (-inf, z].
  double peak = -kInfinity, vmin = kInfinity;
  for (const auto& m : saddle_points(w.V).real_minima) {
    if (m.x <= w.z && m.value < vmin) {
      vmin = m.value;
      peak = m.x;
    }
  }
  if (std::isfinite(w.z) && (peak == -kInfinity || Vd(w.z) < vmin)) {
    vmin = Vd(w.z);
    peak = w.z;
  }
  auto excess = [&](double x) {
    return scale * (Vd(x) - vmin) - 2.0 * w.N * std::log1p(std::abs(x - peak));
  };
  // Outermost crossing on each side: go out until safely past, then walk in.
  auto cutoff = [&](double direction) {
    double d = 1.0;
    while (excess(peak + direction * d) <= target || excess(peak + direction * 2 * d) <= target) d *= 2;
    const int steps = 4000;
    double x = peak + direction * 2 * d;
    for (int i = 0; i < steps; ++i) {
      const double next = x - direction * 2 * d / steps;
      if (excess(next) <= target) break;
      x = next;
    }
    return x;
  };
  const double lo = cutoff(-1.0);
  const double hi_free = cutoff(1.0);
  return {lo, std::min(w.z, hi_free), vmin};
}

template <class Real>
RecurrenceTable<Real> stieltjes(const TruncatedWeight& w, const Window& win, int panels, int order) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::sqrt;
  const int N = w.N;
  const auto rule = composite_gauss_legendre<Real>(Real(win.lo), Real(win.hi), panels, order);
  const auto V = w.V.cast<Real>();
  const std::size_t K = rule.nodes.size();
  const Real scale = Real(w.N) / Real(w.t);
  const Real vmin(win.vmin);

  std::vector<Real> weight(K);
  Real h0(0);
  for (std::size_t k = 0; k < K; ++k) {
    weight[k] = rule.weights[k] * exp(-scale * (V(rule.nodes[k]) - vmin)) / (2 * pi_v<Real>());
    h0 += weight[k];
  }
  if (!(h0 > 0)) throw precision_error("weight underflows on the integration grid; raise --precision");

  RecurrenceTable<Real> tab;
  tab.log_h0 = log(h0) - scale * vmin;
  tab.lower_cutoff = win.lo;
  tab.upper_limit = win.hi;
  tab.nodes = static_cast<int>(K);

  std::vector<std::vector<Real>> p(static_cast<std::size_t>(N), std::vector<Real>(K));
  const Real p0 = 1 / sqrt(h0);
  for (std::size_t k = 0; k < K; ++k) p[0][k] = p0;
  for (int n = 0; n < N; ++n) {
    Real sn(0);
    for (std::size_t k = 0; k < K; ++k) sn += weight[k] * rule.nodes[k] * p[n][k] * p[n][k];
    tab.s.push_back(sn);
    if (n + 1 == N) break;
    const Real beta = n == 0 ? Real(0) : sqrt(tab.r[n - 1]);
    std::vector<Real> u(K);
    Real norm(0);
    for (std::size_t k = 0; k < K; ++k) {
      u[k] = (rule.nodes[k] - sn) * p[n][k] - (n == 0 ? Real(0) : beta * p[n - 1][k]);
      norm += weight[k] * u[k] * u[k];
    }
    if (!(norm > 0)) throw precision_error("non-positive recurrence coefficient; raise --precision");
    tab.r.push_back(norm);
    const Real inv = 1 / sqrt(norm);
    for (std::size_t k = 0; k < K; ++k) p[n + 1][k] = u[k] * inv;
  }

  // Orthonormality on the discrete measure (full Gram for moderate N,
  // the five central bands beyond that).
  double worst = 0.0;
  const int band = N <= 64 ? N : 2;
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N && j <= i + band; ++j) {
      Real g(0);
      for (std::size_t k = 0; k < K; ++k) g += weight[k] * p[i][k] * p[j][k];
      if (i == j) g -= 1;
      worst = std::max(worst, static_cast<double>(abs(g)));
    }
  }
  tab.max_orthonormality_residual = worst;
  return tab;
}

template <class Real>
double table_distance(const RecurrenceTable<Real>& a, const RecurrenceTable<Real>& b) {
  using std::abs;
  double d = static_cast<double>(abs(a.log_h0 - b.log_h0) / (1 + abs(a.log_h0)));
  for (std::size_t i = 0; i < a.r.size(); ++i) d = std::max(d, static_cast<double>(abs(a.r[i] - b.r[i]) / abs(a.r[i])));
  for (std::size_t i = 0; i < a.s.size(); ++i)
    d = std::max(d, static_cast<double>(abs(a.s[i] - b.s[i]) / (1 + abs(a.s[i]))));
  return d;
}

/// max_n p_n(x)^2 w(x) for the orthonormal polynomials of `tab`.
template <class Real>
double edge_density(const TruncatedWeight& w, const RecurrenceTable<Real>& tab, double vmin, double x) {
  const auto V = w.V.cast<double>();
  double prev = 0.0;
  double cur = std::exp(-0.5 * static_cast<double>(tab.log_h0) - 0.5 * (w.N / w.t) * vmin);
  double best = cur * cur;
  for (std::size_t n = 0; n + 1 < tab.s.size(); ++n) {
    const double next = ((x - static_cast<double>(tab.s[n])) * cur -
                         (n == 0 ? 0.0 : std::sqrt(static_cast<double>(tab.r[n - 1])) * prev)) /
                        std::sqrt(static_cast<double>(tab.r[n]));
    prev = cur;
    cur = next;
    best = std::max(best, cur * cur);
  }
  return best * std::exp(-(w.N / w.t) * (V(x) - vmin)) / (2 * M_PI);
}

/// Widens the initial window until the degree < N orthonormal densities at
/// the free ends, times the window width, drop below 10^{-(precision+5)}.
inline Window settle_window(const TruncatedWeight& w) {
  auto win = integration_window(w);
  if (!(win.hi > win.lo)) throw domain_error("wall lies below the integration window");
  const double tol = std::pow(10.0, -(w.precision + 5));
  const double base = win.hi - win.lo;
  for (int iter = 0; iter < 40; ++iter) {
    const double width = win.hi - win.lo;
    const int panels = std::max(2 * w.N, 16) * static_cast<int>(std::ceil(width / base));
    const auto tab = stieltjes<double>(w, win, panels, 20);
    const bool grow_lo = edge_density(w, tab, win.vmin, win.lo) * width > tol;
    const bool grow_hi = win.hi < w.z && edge_density(w, tab, win.vmin, win.hi) * width > tol;
    if (!grow_lo && !grow_hi) return win;
    if (grow_lo) win.lo -= width / 2;
    if (grow_hi) win.hi = std::min(w.z, win.hi + width / 2);
  }
  throw precision_error("could not bound the orthogonality measure; raise --precision");
}

}  // namespace detail

/// Recurrence coefficients of the truncated weight by the Stieltjes procedure
/// on a composite Gauss-Legendre grid of at least 40 N nodes. The grid is
/// refined until two successive refinements agree to 10^{-(precision-5)}.
template <class Real>
RecurrenceTable<Real> recurrence_coefficients(const TruncatedWeight& w) {
  w.validate();
  const auto win = detail::settle_window(w);
  const int digits = std::min(w.precision, digits_of<Real>());
  const int order = std::max(20, digits);
  int panels = std::max((40 * w.N + order - 1) / order, 16);
  const double tol = std::pow(10.0, -(digits - 5));
  auto coarse = detail::stieltjes<Real>(w, win, panels, order);
  for (int attempt = 0; attempt < 4; ++attempt) {
    panels *= 2;
    auto fine = detail::stieltjes<Real>(w, win, panels, order);
    const double dist = detail::table_distance(coarse, fine);
    if (dist < tol) {
      if (fine.max_orthonormality_residual > tol) {
        std::ostringstream os;
        os << "orthonormality residual " << fine.max_orthonormality_residual << " exceeds " << tol
           << " at precision " << w.precision << "; raise --precision";
        throw precision_error(os.str());
      }
      return fine;
    }
    coarse = std::move(fine);
  }
  std::ostringstream os;
  os << "recurrence coefficients did not converge under grid refinement at precision " << w.precision
     << "; raise --precision";
  throw precision_error(os.str());
}

/// log P_N(z) = log Z_N(z) - log Z_N(inf) from the recurrence tables.
template <class Real>
Real log_gap_probability_as(const TruncatedWeight& w) {
  TruncatedWeight free = w;
  free.z = kInfinity;
  const auto wall = recurrence_coefficients<Real>(w);
  const auto open = recurrence_coefficients<Real>(free);
  return wall.log_partition(w.N) - open.log_partition(w.N);
}

/// Runtime-precision entry point. Escalates to 50 digits when the result is
/// smaller than 1e-6 in magnitude (the difference of two O(N^2) numbers).
inline GapResult log_gap_probability(const TruncatedWeight& w) {
  w.validate();
  if (!std::isfinite(w.z)) throw domain_error("log_gap_probability needs a finite wall");
  auto run = [&](int digits) {
    TruncatedWeight ww = w;
    ww.precision = digits;
    return with_precision(digits, [&](auto tag) {
      using Real = typename decltype(tag)::type;
      return static_cast<double>(log_gap_probability_as<Real>(ww));
    });
  };
  int digits = w.precision;
  double value = run(digits);
  if (std::abs(value) < 1e-6 && value != 0.0 && digits < 50) {
    digits = 50;
    value = run(digits);
  }
  // P <= 1: positive values are cancellation noise of two O(N^2) sums.
  if (value > 0) {
    if (value > std::pow(10.0, -(std::min(digits, 150) - 5)) * (1.0 + double(w.N) * w.N))
      throw precision_error("log gap probability came out positive; raise --precision");
    value = 0.0;
  }
  return {value, w.z, w.t, w.N, GapMethod::stieltjes, digits};
}

namespace detail {

template <class Real>
Real hankel_log_det(const TruncatedWeight& w, double vmin_d, const Real& center) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::pow;
  const int N = w.N;
  const auto V = w.V.cast<Real>();
  const Real scale = Real(w.N) / Real(w.t);
  const Real vmin(vmin_d);
  thread_local boost::math::quadrature::exp_sinh<Real> half_line;
  thread_local boost::math::quadrature::sinh_sinh<Real> full_line;
  const Real tol = pow(eps_v<Real>(), Real(0.6));
  // Weight values cached across moments.
  std::map<Real, Real> weight_at;
  auto weight = [&](const Real& x) -> Real {
    auto it = weight_at.find(x);
    if (it == weight_at.end()) it = weight_at.emplace(x, exp(-scale * (V(x) - vmin)) / (2 * pi_v<Real>())).first;
    return it->second;
  };
  std::vector<Real> mu(static_cast<std::size_t>(2 * N - 1));
  for (int k = 0; k < 2 * N - 1; ++k) {
    auto f = [&](const Real& x) -> Real {
      const Real wx = weight(x);
      return wx == 0 ? Real(0) : pow(x - center, k) * wx;
    };
    // A wall right of the center is handled as the full line minus the
    // upper tail, so the bulk never sits far from a quadrature endpoint.
    if (!std::isfinite(w.z))
      mu[k] = full_line.integrate(f, tol);
    else if (Real(w.z) <= center)
      mu[k] = half_line.integrate(f, -std::numeric_limits<Real>::infinity(), Real(w.z), tol);
    else
      mu[k] = full_line.integrate(f, tol) - half_line.integrate(f, Real(w.z), std::numeric_limits<Real>::infinity(), tol);
  }
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> H(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) H(i, j) = mu[i + j];
  Eigen::PartialPivLU<decltype(H)> lu(H);
  const auto& U = lu.matrixLU();
  Real acc(0);
  for (int i = 0; i < N; ++i) acc += log(abs(U(i, i)));
  return acc - N * scale * vmin;
}

}  // namespace detail

/// Independent oracle: Hankel determinants of moments over the half line
/// (-inf, z] and the full line by double-exponential quadrature, in 50-digit
/// arithmetic. Needs no integration cutoff.
inline GapResult hankel_log_gap(const TruncatedWeight& w) {
  w.validate();
  if (w.N > 8) throw domain_error("hankel_log_gap: N > 8 is too ill-conditioned");
  if (!std::isfinite(w.z)) throw domain_error("hankel_log_gap needs a finite wall");
  TruncatedWeight free = w;
  free.z = kInfinity;
  const auto minima = saddle_points(w.V).real_minima;
  const auto lowest = std::min_element(minima.begin(), minima.end(),
                                       [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });
  const Float50 center(lowest->x);
  const Float50 value =
      detail::hankel_log_det<Float50>(w, lowest->value, center) - detail::hankel_log_det<Float50>(free, lowest->value, center);
  return {static_cast<double>(value), w.z, w.t, w.N, GapMethod::hankel, 50};
}

struct StringResidualReport {
  double integrated = std::numeric_limits<double>::quiet_NaN();  ///< finite wall
  double free_offdiagonal = std::numeric_limits<double>::quiet_NaN();  ///< z = inf
  double free_diagonal = std::numeric_limits<double>::quiet_NaN();     ///< z = inf
  int rows = 0;
};

/// Residuals of the string equations on the computed recurrence table.
/// Finite wall: max_n |(V'(Q)(Q - z))_{nn} - (2n+1) t/N|. No wall:
/// max_n |sqrt(r_n) V'(Q)_{n,n-1} - t n/N| and max_n |V'(Q)_{nn}|. Only
/// rows n < N - deg V, which need no entries beyond the table, are used.
template <class Real>
StringResidualReport string_residuals(const TruncatedWeight& w, const RecurrenceTable<Real>& tab) {
  using std::abs;
  using std::sqrt;
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = static_cast<int>(tab.s.size());
  Matrix Q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) Q(i, i) = tab.s[i];
  for (int i = 1; i < n; ++i) Q(i, i - 1) = Q(i - 1, i) = sqrt(tab.r[i - 1]);
  const auto dV = derivative(w.V).template cast<Real>();
  Matrix P = Matrix::Zero(n, n);
  for (int j = dV.degree(); j >= 0; --j) {
    P = (P * Q).eval();
    for (int i = 0; i < n; ++i) P(i, i) += dV[j];
  }
  StringResidualReport rep;
  rep.rows = std::max(0, w.N - w.V.degree());
  const Real tN = Real(w.t) / w.N;
  if (std::isfinite(w.z)) {
    Matrix Qz = Q;
    for (int i = 0; i < n; ++i) Qz(i, i) -= Real(w.z);
    const Matrix PQ = P * Qz;
    double worst = 0.0;
    for (int i = 0; i < rep.rows; ++i)
      worst = std::max(worst, static_cast<double>(abs(PQ(i, i) - (2 * i + 1) * tN)));
    rep.integrated = worst;
  } else {
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < rep.rows; ++i) {
      diag = std::max(diag, static_cast<double>(abs(P(i, i))));
      if (i > 0) off = std::max(off, static_cast<double>(abs(sqrt(tab.r[i - 1]) * P(i, i - 1) - i * tN)));
    }
    rep.free_offdiagonal = off;
    rep.free_diagonal = diag;
  }
  return rep;
}

}  // namespace rmtail
