#pragma once

#include <cstdlib>
#include <limits>
#include <string>
#include <type_traits>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "rmtail/errors.hpp"

namespace rmtail {

namespace mp = boost::multiprecision;

using Rational = mp::cpp_rational;
using Float50 = mp::cpp_bin_float_50;
using Float100 = mp::cpp_bin_float_100;
using Float150 = mp::number<mp::cpp_bin_float<150>>;

/// Decimal digits carried by `Real`. double reports 16 (IEEE binary64).
template <class Real>
constexpr int digits_of() {
  if constexpr (std::is_same_v<Real, double>) {
    return 16;
  } else {
    return std::numeric_limits<Real>::digits10;
  }
}

/// Working type for ill-conditioned solves: at least 50 digits.
template <class Real>
using extended_t = std::conditional_t<(digits_of<Real>() < 50), Float50, Real>;

template <class To, class From>
To real_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else {
    return static_cast<To>(x);
  }
}

template <class Real>
Real pi_v() {
  return boost::math::constants::pi<Real>();
}

template <class Real>
Real eps_v() {
  return std::numeric_limits<Real>::epsilon();
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Default decimal-digit precision for orthogonal-polynomial work:
/// RMT_PRECISION if set and valid, else 16 (plain double).
inline int default_precision() {
  if (const char* env = std::getenv("RMT_PRECISION")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 8 && v <= 150) return static_cast<int>(v);
  }
  return 16;
}

/// Calls `f(std::type_identity<Real>{})` with the narrowest supported Real
/// carrying at least `digits` decimal digits.
template <class F>
auto with_precision(int digits, F&& f) {
  if (digits <= 16) return f(std::type_identity<double>{});
  if (digits <= 50) return f(std::type_identity<Float50>{});
  if (digits <= 100) return f(std::type_identity<Float100>{});
  if (digits <= 150) return f(std::type_identity<Float150>{});
  throw precision_error("precision of " + std::to_string(digits) +
                        " digits exceeds the supported maximum of 150");
}

}  // namespace rmtail
