#pragma once

#include <string>

namespace rmtail {

enum class Method { closed_form, planar_solver, spectral_curve, orthopoly, montecarlo };
enum class Order { leading_N2, leading_N, finite_N };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::planar_solver: return "planar_solver";
    case Method::spectral_curve: return "spectral_curve";
    case Method::orthopoly: return "orthopoly";
    case Method::montecarlo: return "montecarlo";
  }
  return "unknown";
}

inline std::string to_string(Order o) {
  switch (o) {
    case Order::leading_N2: return "leading_N2";
    case Order::leading_N: return "leading_N";
    case Order::finite_N: return "finite_N";
  }
  return "unknown";
}

/// A rate-function value, instanton action or log probability, tagged with
/// how it was obtained.
struct TailResult {
  double value = 0.0;
  Method method = Method::closed_form;
  Order order = Order::leading_N2;
  bool out_of_range = false;  ///< argument on the wrong side of the edge
};

}  // namespace rmtail
