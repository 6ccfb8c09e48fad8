#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rmtail/errors.hpp"
#include "rmtail/numeric_types.hpp"

namespace rmtail {

/// Dense univariate polynomial; coeffs()[i] multiplies x^i.
///
/// The representation is canonical: the leading stored coefficient is
/// nonzero, and the zero polynomial has no coefficients (degree -1).
/// With T = Rational every operation is exact.
template <class T>
class Polynomial {
 public:
  using value_type = T;

  Polynomial() = default;
  explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<T> coeffs) : coeffs_(coeffs) { trim(); }

  static Polynomial constant(T c) { return Polynomial(std::vector<T>{std::move(c)}); }
  static Polynomial monomial(T c, int power) {
    std::vector<T> v(static_cast<std::size_t>(power) + 1, T(0));
    v.back() = std::move(c);
    return Polynomial(std::move(v));
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<T>& coeffs() const { return coeffs_; }

  /// Coefficient of x^i; zero beyond the degree.
  T operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : T(0); }

  const T& leading() const {
    if (is_zero()) throw domain_error("leading coefficient of the zero polynomial");
    return coeffs_.back();
  }

  /// Horner evaluation. X may be wider than T (e.g. Rational coefficients
  /// evaluated at a Float50 point after conversion).
  template <class X>
  X operator()(const X& x) const {
    X acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + real_cast<X>(*it);
    return acc;
  }

  template <class U>
  Polynomial<U> cast() const {
    std::vector<U> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.push_back(real_cast<U>(c));
    return Polynomial<U>(std::move(out));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    trim();
    return *this;
  }
  Polynomial& operator*=(const T& s) {
    for (auto& c : coeffs_) c *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= T(-1); }
  friend Polynomial operator*(Polynomial a, const T& s) { return a *= s; }
  friend Polynomial operator*(const T& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> out(a.coeffs_.size() + b.coeffs_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(out));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == T(0)) coeffs_.pop_back();
  }

  std::vector<T> coeffs_;
};

template <class T>
Polynomial<T> derivative(const Polynomial<T>& p) {
  if (p.degree() < 1) return {};
  std::vector<T> out(static_cast<std::size_t>(p.degree()));
  for (int i = 1; i <= p.degree(); ++i) out[i - 1] = p[i] * T(i);
  return Polynomial<T>(std::move(out));
}

/// Euclidean division num = q*den + r with deg r < deg den. T must be a field.
template <class T>
std::pair<Polynomial<T>, Polynomial<T>> divmod(const Polynomial<T>& num, const Polynomial<T>& den) {
  if (den.is_zero()) throw domain_error("polynomial division by zero");
  if (num.degree() < den.degree()) return {Polynomial<T>{}, num};
  std::vector<T> rem = num.coeffs();
  std::vector<T> quot(static_cast<std::size_t>(num.degree() - den.degree()) + 1, T(0));
  const int dd = den.degree();
  const T& lead = den.leading();
  for (int k = num.degree() - dd; k >= 0; --k) {
    T q = rem[k + dd] / lead;
    quot[k] = q;
    for (int j = 0; j <= dd; ++j) rem[k + j] -= q * den[j];
  }
  rem.resize(static_cast<std::size_t>(dd));
  return {Polynomial<T>(std::move(quot)), Polynomial<T>(std::move(rem))};
}

template <class T>
Polynomial<T> rem(const Polynomial<T>& num, const Polynomial<T>& den) {
  return divmod(num, den).second;
}

/// Human-readable form, lowest power first: "-16*x + 48*x^2 - 128/3*x^3".
template <class T>
std::string to_string(const Polynomial<T>& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i <= p.degree(); ++i) {
    T c = p[i];
    if (c == T(0)) continue;
    bool neg = c < T(0);
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    T mag = neg ? T(-c) : c;
    if (i == 0 || mag != T(1)) {
      os << mag;
      if (i > 0) os << "*";
    }
    if (i == 1) os << "x";
    if (i > 1) os << "x^" << i;
    first = false;
  }
  return os.str();
}

}  // namespace rmtail
