#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rmtail/errors.hpp"
#include "rmtail/numeric_types.hpp"
#include "rmtail/polynomial.hpp"

namespace rmtail {

using RationalPolynomial = Polynomial<Rational>;

// ---------------------------------------------------------------------------
// Potential families
// ---------------------------------------------------------------------------

/// V(x) = x^2/2.
inline RationalPolynomial gaussian_potential() {
  return RationalPolynomial{Rational(0), Rational(0), Rational(1, 2)};
}

namespace detail {

inline Rational pochhammer(const Rational& a, int n) {
  Rational out(1);
  for (int i = 0; i < n; ++i) out *= a + i;
  return out;
}

inline Rational factorial(int n) {
  Rational out(1);
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

}  // namespace detail

/// Multi-critical potential of order k: support [0,1] at unit coupling,
/// density vanishing like (1-x)^{2k+1/2} at the upper edge.
///
///   V_k(x) = 2(2k+2)!/(-1/2)_{2k+2} * sum_{l=0}^{2k+1}
///              (-1)^l (l+1/2)_{2k+1-l} / ((2k+1-l)! (l+1)) x^{l+1}
inline RationalPolynomial multicritical_potential(int k) {
  if (k < 0) throw domain_error("multicritical_potential: k must be non-negative, got " + std::to_string(k));
  const int top = 2 * k + 1;
  const Rational prefactor =
      Rational(2) * detail::factorial(2 * k + 2) / detail::pochhammer(Rational(-1, 2), 2 * k + 2);
  std::vector<Rational> c(static_cast<std::size_t>(top) + 2, Rational(0));
  for (int l = 0; l <= top; ++l) {
    Rational term = detail::pochhammer(Rational(2 * l + 1, 2), top - l) /
                    (detail::factorial(top - l) * Rational(l + 1));
    if (l % 2 == 1) term = -term;
    c[static_cast<std::size_t>(l) + 1] = prefactor * term;
  }
  return RationalPolynomial(std::move(c));
}

/// Which potential an ensemble uses, plus its coupling t (weight e^{-(N/t)V}).
struct PotentialSpec {
  enum class Family { gaussian, multicritical, custom };

  Family family = Family::gaussian;
  int k = 0;
  RationalPolynomial custom;
  double t = 1.0;

  RationalPolynomial polynomial() const {
    switch (family) {
      case Family::gaussian:
        return gaussian_potential();
      case Family::multicritical:
        return multicritical_potential(k);
      case Family::custom:
        return custom;
    }
    return {};
  }

  void validate() const {
    if (!(t > 0.0)) throw domain_error("coupling t must be positive");
    if (family == Family::multicritical && k < 0) throw domain_error("multicritical order k must be >= 0");
    if (family == Family::custom) {
      if (custom.degree() < 2 || custom.degree() % 2 != 0 || custom.leading() <= 0)
        throw domain_error("custom potential needs even degree >= 2 and positive leading coefficient");
    }
  }

  std::string describe() const {
    switch (family) {
      case Family::gaussian:
        return "gaussian";
      case Family::multicritical:
        return "multicritical:" + std::to_string(k);
      case Family::custom: {
        std::string s = "coeffs:";
        for (int i = 0; i <= custom.degree(); ++i) {
          if (i) s += ",";
          s += custom[i].str();
        }
        return s;
      }
    }
    return {};
  }
};

namespace detail {

inline mp::cpp_int parse_digits(const std::string& digits, const std::string& literal) {
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw domain_error("malformed rational literal '" + literal + "'");
  // cpp_int treats a leading zero as an octal prefix.
  const auto first = std::min(digits.find_first_not_of('0'), digits.size() - 1);
  return mp::cpp_int(digits.substr(first));
}

}  // namespace detail

/// Parses "3", "-128/3" or "0.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  if (s.empty()) throw domain_error("empty rational literal");
  const bool neg = s[0] == '-';
  const std::string body = (neg || s[0] == '+') ? s.substr(1) : s;
  Rational r;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    const auto den = detail::parse_digits(body.substr(slash + 1), s);
    if (den == 0) throw domain_error("zero denominator in '" + s + "'");
    r = Rational(detail::parse_digits(body.substr(0, slash), s), den);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    const std::string whole = body.substr(0, dot), frac = body.substr(dot + 1);
    r = Rational(detail::parse_digits(whole + frac, s),
                 mp::pow(mp::cpp_int(10), static_cast<unsigned>(frac.size())));
  } else {
    r = Rational(detail::parse_digits(body, s));
  }
  return neg ? Rational(-r) : r;
}

/// Potential spec strings: "gaussian", "multicritical:K" (alias "mc:K"),
/// or "coeffs:c0,c1,...". Coupling is set separately.
inline PotentialSpec parse_potential(std::string_view text) {
  PotentialSpec spec;
  std::string s(text);
  if (s == "gaussian") return spec;
  auto colon = s.find(':');
  std::string head = s.substr(0, colon);
  std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "multicritical" || head == "mc") {
    spec.family = PotentialSpec::Family::multicritical;
    try {
      std::size_t used = 0;
      spec.k = std::stoi(tail, &used);
      if (used != tail.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw domain_error("bad multicritical order in '" + s + "'");
    }
    if (spec.k < 0) throw domain_error("multicritical order must be non-negative");
    return spec;
  }
  if (head == "coeffs" || head == "custom") {
    std::vector<Rational> c;
    std::stringstream ss(tail);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(parse_rational(item));
    spec.family = PotentialSpec::Family::custom;
    spec.custom = RationalPolynomial(std::move(c));
    return spec;
  }
  throw domain_error("unknown potential '" + s + "' (expected gaussian, multicritical:K or coeffs:LIST)");
}

// ---------------------------------------------------------------------------
// Sturm chains
// ---------------------------------------------------------------------------

/// p, p', -rem(p, p'), ... ending with the zero polynomial.
inline std::vector<RationalPolynomial> sturm_chain(const RationalPolynomial& p) {
  if (p.is_zero()) throw domain_error("sturm_chain of the zero polynomial");
  std::vector<RationalPolynomial> chain{p, derivative(p)};
  while (!chain.back().is_zero()) {
    const auto& prev = chain[chain.size() - 2];
    chain.push_back(-rem(prev, chain.back()));
  }
  return chain;
}

namespace detail {

inline int sign_of(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline int count_sign_changes(const std::vector<int>& signs) {
  int changes = 0, last = 0;
  for (int s : signs) {
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

inline int variations_at(const std::vector<RationalPolynomial>& chain, const Rational& x) {
  std::vector<int> signs;
  for (const auto& q : chain)
    if (!q.is_zero()) signs.push_back(sign_of(q(x)));
  return count_sign_changes(signs);
}

inline int variations_at_infinity(const std::vector<RationalPolynomial>& chain, bool negative) {
  std::vector<int> signs;
  for (const auto& q : chain) {
    if (q.is_zero()) continue;
    int s = sign_of(q.leading());
    if (negative && q.degree() % 2 == 1) s = -s;
    signs.push_back(s);
  }
  return count_sign_changes(signs);
}

}  // namespace detail

/// Number of distinct real roots of p, on all of R or inside (lo, hi).
/// Multiple roots count once. Interval endpoints must not be roots; the
/// caller is expected to perturb them instead.
inline int count_real_roots(const RationalPolynomial& p,
                            const std::optional<std::pair<Rational, Rational>>& interval = std::nullopt) {
  if (p.is_zero()) throw domain_error("count_real_roots of the zero polynomial");
  const auto chain = sturm_chain(p);
  if (!interval) {
    return detail::variations_at_infinity(chain, true) - detail::variations_at_infinity(chain, false);
  }
  const auto& [lo, hi] = *interval;
  if (!(lo < hi)) throw domain_error("count_real_roots: interval needs lo < hi");
  if (p(lo) == 0 || p(hi) == 0)
    throw domain_error("count_real_roots: an interval endpoint is a root; perturb the endpoint and retry");
  return detail::variations_at(chain, lo) - detail::variations_at(chain, hi);
}

// ---------------------------------------------------------------------------
// Saddle points
// ---------------------------------------------------------------------------

struct CriticalPoint {
  double x = 0.0;
  double value = 0.0;  ///< V(x)
  int multiplicity = 1;
};

/// Classified roots of V'.
struct SaddleSet {
  std::vector<CriticalPoint> real_minima;
  std::vector<CriticalPoint> real_maxima;
  std::vector<CriticalPoint> stationary_inflections;
  std::vector<std::complex<double>> complex_saddles;  ///< Im > 0; conjugates implied
  double max_residual = 0.0;

  int total_multiplicity() const {
    int n = 0;
    for (const auto* group : {&real_minima, &real_maxima, &stationary_inflections})
      for (const auto& c : *group) n += c.multiplicity;
    return n + 2 * static_cast<int>(complex_saddles.size());
  }
  int distinct_real_count() const {
    return static_cast<int>(real_minima.size() + real_maxima.size() + stationary_inflections.size());
  }
};

namespace detail {

struct NumericRoot {
  std::complex<double> z;
  int multiplicity = 1;
};

template <class T>
std::complex<long double> horner_complex(const std::vector<T>& c, std::complex<long double> x) {
  std::complex<long double> acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + static_cast<long double>(*it);
  return acc;
}

/// Companion-matrix roots, Newton-polished in long double, then clustered so
/// that a numerically split multiple root is reported once with multiplicity.
inline std::vector<NumericRoot> polynomial_roots(const RationalPolynomial& p) {
  const int d = p.degree();
  if (d < 1) return {};
  std::vector<double> c(static_cast<std::size_t>(d) + 1);
  for (int i = 0; i <= d; ++i) c[i] = static_cast<double>(p[i]);
  const double lead = c[d];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw numerical_error("polynomial root finder did not converge");

  std::vector<long double> cd(c.begin(), c.end());
  std::vector<long double> dc;
  for (int i = 1; i <= d; ++i) dc.push_back(cd[i] * i);

  std::vector<std::complex<double>> raw;
  for (int i = 0; i < d; ++i) {
    std::complex<long double> z(solver.eigenvalues()[i].real(), solver.eigenvalues()[i].imag());
    for (int it = 0; it < 8; ++it) {
      auto f = horner_complex(cd, z);
      auto fp = horner_complex(dc, z);
      if (std::abs(fp) == 0.0L) break;
      auto next = z - f / fp;
      if (std::abs(horner_complex(cd, next)) >= std::abs(f)) break;
      z = next;
    }
    raw.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  }

  // Cluster by proximity; tolerance grows like eps^{1/m} for m-fold roots.
  std::vector<NumericRoot> out;
  std::vector<bool> used(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    std::complex<double> sum = raw[i];
    int m = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (!used[j] && std::abs(raw[j] - raw[i]) < 1e-5 * (1.0 + std::abs(raw[i]))) {
        used[j] = true;
        sum += raw[j];
        ++m;
      }
    }
    out.push_back({sum / static_cast<double>(m), m});
  }
  for (auto& r : out) {
    // Clusters straddling the real axis are real multiple roots.
    if (std::abs(r.z.imag()) < 1e-7 * (1.0 + std::abs(r.z.real()))) r.z = {r.z.real(), 0.0};
  }
  return out;
}

}  // namespace detail

/// Real roots of p found numerically (distinct, ascending).
inline std::vector<double> numeric_real_roots(const RationalPolynomial& p) {
  std::vector<double> xs;
  for (const auto& r : detail::polynomial_roots(p))
    if (r.z.imag() == 0.0) xs.push_back(r.z.real());
  std::sort(xs.begin(), xs.end());
  return xs;
}

/// Critical points of V, classified. The numeric real-root count is
/// cross-checked against the exact Sturm count of V'.
inline SaddleSet saddle_points(const RationalPolynomial& V) {
  if (V.degree() < 2) throw domain_error("saddle_points needs deg V >= 2");
  const RationalPolynomial dV = derivative(V);
  const auto roots = detail::polynomial_roots(dV);

  double max_coeff = 0.0;
  for (const auto& c : dV.coeffs()) max_coeff = std::max(max_coeff, std::abs(static_cast<double>(c)));
  std::vector<long double> dv;
  for (const auto& c : dV.coeffs()) dv.push_back(static_cast<long double>(c));

  SaddleSet out;
  std::vector<RationalPolynomial> derivs{V, dV};
  for (int i = 2; i <= V.degree(); ++i) derivs.push_back(derivative(derivs.back()));
  const auto Vd = V.cast<double>();

  for (const auto& r : roots) {
    const double scale = 1e-12 * (1.0 + std::pow(std::abs(r.z), dV.degree())) * max_coeff;
    const double residual = static_cast<double>(std::abs(detail::horner_complex(dv, {r.z.real(), r.z.imag()})));
    out.max_residual = std::max(out.max_residual, residual / std::max(scale, 1e-300) * 1e-12);
    if (residual > scale * std::pow(1e4, r.multiplicity - 1)) {
      std::ostringstream os;
      os << "saddle_points: root " << r.z << " has residual " << residual << " above tolerance " << scale;
      throw numerical_error(os.str());
    }
    if (r.z.imag() > 0.0) {
      for (int m = 0; m < r.multiplicity; ++m) out.complex_saddles.push_back(r.z);
      continue;
    }
    if (r.z.imag() < 0.0) continue;
    // First non-vanishing derivative of V beyond V' has order multiplicity+1.
    const double x = r.z.real();
    const auto& test = derivs[static_cast<std::size_t>(r.multiplicity) + 1];
    const double curvature = test.cast<double>()(x);
    CriticalPoint cp{x, Vd(x), r.multiplicity};
    if (r.multiplicity % 2 == 0) {
      out.stationary_inflections.push_back(cp);
    } else if (curvature > 0.0) {
      out.real_minima.push_back(cp);
    } else {
      out.real_maxima.push_back(cp);
    }
  }
  auto by_x = [](const CriticalPoint& a, const CriticalPoint& b) { return a.x < b.x; };
  std::sort(out.real_minima.begin(), out.real_minima.end(), by_x);
  std::sort(out.real_maxima.begin(), out.real_maxima.end(), by_x);
  std::sort(out.stationary_inflections.begin(), out.stationary_inflections.end(), by_x);

  const int exact = count_real_roots(dV);
  if (exact != out.distinct_real_count()) {
    std::ostringstream os;
    os << "saddle_points: numeric root finder reports " << out.distinct_real_count()
       << " real critical points but the Sturm count is " << exact;
    throw numerical_error(os.str());
  }
  return out;
}

}  // namespace rmtail
