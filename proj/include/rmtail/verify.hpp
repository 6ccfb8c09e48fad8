#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rmtail/montecarlo.hpp"
#include "rmtail/orthopoly.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/rate_functions.hpp"
#include "rmtail/spectral_curve.hpp"

namespace rmtail {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  int criterion = 0;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  double time_limit = 0.0;

  bool passed() const {
    if (seconds > time_limit) return false;
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

struct Suite {
  std::string name;
  int criterion;
  double time_limit;  ///< seconds
  std::function<std::vector<CheckResult>()> run;
};

namespace detail {

inline CheckResult below(std::string name, double value, double limit) {
  return {std::move(name), value < limit, fmt::format("{:.3e} < {:.0e}", value, limit)};
}

inline CheckResult within(std::string name, double value, double lo, double hi) {
  return {std::move(name), value >= lo && value <= hi, fmt::format("{:.6g} in [{:g}, {:g}]", value, lo, hi)};
}

inline std::vector<CheckResult> gaussian_closed_forms() {
  double left = 0.0, right = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double z = 1.4 * i / 49;
    left = std::max(left, std::abs(-2 * 0.25 * psi_minus(z).value - gaussian_left_F(z, 0.5)));
  }
  for (int i = 1; i <= 50; ++i) {
    const double z = std::sqrt(2.0) + (5 - std::sqrt(2.0)) * i / 50;
    right = std::max(right, std::abs(psi_plus(z) - gaussian_action(0.5, z)));
  }
  return {below("left: -2t^2 psi_-(z) vs F(z, 1/2)", left, 1e-10),
          below("right: psi_+(z) vs A(1/2, z)", right, 1e-10)};
}

inline std::vector<CheckResult> action_quadrature() {
  const auto g = solve_one_cut<double>(gaussian_potential(), 1.0);
  double dg = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double z = 2.05 + (6 - 2.05) * i / 39;
    dg = std::max(dg, std::abs(gaussian_action(1.0, z) - instanton_action(g, z).A));
  }
  const auto v = solve_one_cut<double>(multicritical_potential(1), 1.0);
  double dv = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double z = 1.01 + (2 - 1.01) * i / 39;
    dv = std::max(dv, std::abs(multicritical_action(v, z) - instanton_action(v, z).A));
  }
  return {below("Gaussian closed form vs quadrature, z in [2.05, 6]", dg, 1e-10),
          below("V_1 closed form vs quadrature, z in [1.01, 2]", dv, 1e-8)};
}

inline std::vector<CheckResult> endpoints() {
  const auto g = solve_one_cut<double>(gaussian_potential(), 1.0);
  const auto v = solve_one_cut<double>(multicritical_potential(1), 1.0);
  const double ref = density(v, 0.5).rho / (std::sqrt(0.5) * std::pow(0.5, 2.5));
  double spread = 0.0;
  for (int i = 1; i < 40; ++i) {
    const double x = i / 40.0;
    const double ratio = density(v, x).rho / (std::sqrt(x) * std::pow(1 - x, 2.5));
    spread = std::max(spread, std::abs(ratio / ref - 1));
  }
  return {below("Gaussian (b, a) = (-2, 2)", std::max(std::abs(g.b + 2), std::abs(g.a - 2)), 1e-12),
          below("V_1 (b, a) = (0, 1)", std::max(std::abs(v.b), std::abs(v.a - 1)), 1e-8),
          below("V_1 rho / (x^1/2 (1-x)^5/2) constant", spread, 1e-6)};
}

inline std::vector<CheckResult> edge_exponents() {
  const auto V1 = multicritical_potential(1);
  const auto v = solve_one_cut<double>(V1, 1.0);
  const double gl = edge_exponent(
      [](double z) { return static_cast<double>(gaussian_left_F<Float50>(Float50(z), Float50(1))); }, 2.0,
      EdgeSide::left);
  const double gr = edge_exponent([](double z) { return gaussian_action(1.0, z); }, 2.0, EdgeSide::right);
  const double vl = edge_exponent([&](double z) { return left_tail_general(V1, 1.0, z).value; }, 1.0, EdgeSide::left);
  const double vr = edge_exponent([&](double z) { return multicritical_action(v, z); }, 1.0, EdgeSide::right);
  return {within("Gaussian left slope 3", gl, 2.95, 3.05), within("Gaussian right slope 3/2", gr, 1.45, 1.55),
          within("V_1 left slope 7", vl, 6.8, 7.2), within("V_1 right slope 7/2", vr, 3.45, 3.55)};
}

inline std::vector<CheckResult> oracle_equivalence() {
  double worst = 0.0;
  for (const auto& V : {gaussian_potential(), multicritical_potential(1)}) {
    for (int N = 2; N <= 6; ++N) {
      for (int i = 0; i < 10; ++i) {
        const TruncatedWeight w{V, 1.0, N, -1.0 + 4.0 * i / 9, 50};
        worst = std::max(worst, std::abs(log_gap_probability(w).logP - hankel_log_gap(w).logP));
      }
    }
  }
  const double two = log_gap_probability({gaussian_potential(), 1.0, 2, 0.0, 50}).logP;
  return {below("Stieltjes vs Hankel, N = 2..6, 10 walls, Gaussian and V_1", worst, 1e-8),
          below("N=2 Gaussian z=0 vs log(1/4 - 1/(2 pi))", std::abs(two - std::log(0.25 - 0.5 / M_PI)), 1e-10)};
}

inline std::vector<CheckResult> string_residual_checks() {
  std::vector<CheckResult> out;
  const TruncatedWeight g{gaussian_potential(), 1.0, 10, 1.0, 16};
  out.push_back(below("integrated string equation, Gaussian N=10 z=1",
                      string_residuals(g, recurrence_coefficients<double>(g)).integrated, 1e-6));
  const TruncatedWeight v{multicritical_potential(1), 1.0, 8, 1.3, 16};
  out.push_back(below("integrated string equation, V_1 N=8 z=1.3",
                      string_residuals(v, recurrence_coefficients<double>(v)).integrated, 1e-5));
  double free = 0.0;
  for (auto w : {g, v}) {
    w.z = kInfinity;
    const auto rep = string_residuals(w, recurrence_coefficients<double>(w));
    free = std::max({free, rep.free_offdiagonal, rep.free_diagonal});
  }
  out.push_back(below("z = inf string equations, Gaussian N=10 and V_1 N=8", free, 1e-8));
  double r1 = 0.0, r2 = 0.0;
  for (const auto& st : left_tail_states<double>(multicritical_potential(1), 1.0, 0.9, 16)) {
    const auto r = k1_string_residuals(st, 0.9);
    r1 = std::max(r1, r.first);
    r2 = std::max(r2, r.second);
  }
  out.push_back(below("k=1 planar string equation 1 on the constrained zeta grid", r1, 1e-8));
  out.push_back(below("k=1 planar string equation 2 on the constrained zeta grid", r2, 1e-5));
  return out;
}

inline std::vector<CheckResult> asymptotic_match() {
  const auto sol = solve_one_cut<double>(gaussian_potential(), 1.0);
  std::vector<double> ratio;
  std::string listing;
  for (int N : {10, 20, 40}) {
    const double exact = log_gap_probability({gaussian_potential(), 1.0, N, 2.2, 50}).logP;
    ratio.push_back(exact / right_tail_log_prob(sol, 2.2, N));
    listing += fmt::format("{}N={}: {:.4f}", listing.empty() ? "" : ", ", N, ratio.back());
  }
  const bool improving = std::abs(ratio[2] - 1) < std::abs(ratio[1] - 1) && std::abs(ratio[1] - 1) < std::abs(ratio[0] - 1);
  auto at20 = within("ratio at N=20", ratio[1], 0.75, 1.25);
  at20.detail += " (" + listing + ")";
  return {at20, {"|ratio - 1| decreases from N=10 to 20 to 40", improving, listing}};
}

inline std::vector<CheckResult> ode_consistency() {
  double worst = 0.0;
  const Float50 h("1e-12");
  for (double zeta : {0.5, 1.0, 1.5, 2.0}) {
    for (double m : {1.1, 1.5, 2.0, 3.0, 4.0}) {
      const Float50 t(zeta);
      const Float50 z(m * 2 * std::sqrt(zeta));
      const Float50 dA = (gaussian_action<Float50>(t + h, z) - gaussian_action<Float50>(t - h, z)) / (2 * h);
      const Float50 c = cosh(dA / 2);
      worst = std::max(worst, static_cast<double>(abs(4 * t * c * c - z * z)));
    }
  }
  return {below("4 zeta cosh^2(A'/2) = z^2 at 20 (zeta, z) pairs", worst, 1e-6)};
}

inline std::vector<CheckResult> montecarlo_checks() {
  std::vector<CheckResult> out;
  SamplerConfig two;
  two.N = 2;
  two.sweeps = 1000000;
  two.burn_in = 1000;
  two.seed = 20240601;
  const auto s2 = sample(two);
  const auto m2 = lambda_max_stats(s2, {0.0});
  const double exact = 0.25 - 0.5 / M_PI;
  out.push_back({"N=2 P(lambda_max < 0) within 3 sigma of 1/4 - 1/(2 pi)",
                 std::abs(m2.cdf[0].value - exact) < 3 * m2.cdf[0].error,
                 fmt::format("{:.5f} +- {:.5f} vs {:.5f}", m2.cdf[0].value, m2.cdf[0].error, exact)});

  SamplerConfig fifty;
  fifty.N = 50;
  fifty.sweeps = 8000;
  fifty.thin = 4;
  fifty.burn_in = 1000;
  fifty.seed = 20240602;
  const auto s50 = sample(fifty);
  out.push_back(below("N=50 Gaussian KS distance to the semicircle",
                      ks_distance(s50, [](double x) { return semicircle_cdf(x); }), 0.05));

  SamplerConfig quartic = fifty;
  quartic.V = multicritical_potential(1);
  quartic.seed = 20240603;
  const auto mv = lambda_max_stats(sample(quartic));
  auto c = within("N=50 V_1 mean lambda_max", mv.mean.value, 0.85, 1.05);
  c.detail += fmt::format(" (+- {:.4f})", mv.mean.error);
  out.push_back(c);
  return out;
}

inline std::vector<CheckResult> sturm_checks() {
  std::vector<CheckResult> out;
  for (int k = 0; k <= 6; ++k) {
    const auto dV = derivative(multicritical_potential(k));
    Rational bound(1);
    for (int i = 0; i < dV.degree(); ++i) bound = std::max(bound, Rational(1 + abs(dV[i] / dV.leading())));
    const int total = count_real_roots(dV);
    const int positive = count_real_roots(dV, std::pair{Rational(0), bound});
    out.push_back({fmt::format("k={}: one real critical point, on the positive axis", k), total == 1 && positive == 1,
                   fmt::format("real roots {}, in (0, {}] {}", total, bound.str(), positive)});
  }
  return out;
}

}  // namespace detail

/// The acceptance suites, in criterion order.
inline const std::vector<Suite>& acceptance_suites() {
  static const std::vector<Suite> suites{
      {"gaussian-closed-forms", 1, 1.0, detail::gaussian_closed_forms},
      {"action-quadrature", 2, 5.0, detail::action_quadrature},
      {"endpoints", 3, 1.0, detail::endpoints},
      {"edge-exponents", 4, 30.0, detail::edge_exponents},
      {"oracle-equivalence", 5, 120.0, detail::oracle_equivalence},
      {"string-residuals", 6, 120.0, detail::string_residual_checks},
      {"asymptotic-match", 7, 600.0, detail::asymptotic_match},
      {"ode-consistency", 8, 1.0, detail::ode_consistency},
      {"montecarlo", 9, 300.0, detail::montecarlo_checks},
      {"sturm", 10, 1.0, detail::sturm_checks},
  };
  return suites;
}

inline const Suite& find_suite(const std::string& name) {
  for (const auto& s : acceptance_suites())
    if (s.name == name) return s;
  throw domain_error("unknown suite: " + name);
}

/// Runs a suite; an exception inside it counts as a failed check.
inline SuiteReport run_suite(const Suite& suite) {
  SuiteReport rep;
  rep.suite = suite.name;
  rep.criterion = suite.criterion;
  rep.time_limit = suite.time_limit;
  const auto start = std::chrono::steady_clock::now();
  try {
    rep.checks = suite.run();
  } catch (const std::exception& e) {
    rep.checks.push_back({"suite raised", false, e.what()});
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// One line: PASS|FAIL, criterion, suite, runtime, then every check.
inline std::string format_report(const SuiteReport& rep) {
  std::string detail;
  for (const auto& c : rep.checks) {
    if (!detail.empty()) detail += "; ";
    detail += (c.passed ? "" : "FAILED ") + c.name + ": " + c.detail;
  }
  if (rep.seconds > rep.time_limit) detail += fmt::format("; FAILED runtime over {:.0f}s", rep.time_limit);
  return fmt::format("{} criterion {:>2} {:<22} {:8.2f}s | {}", rep.passed() ? "PASS" : "FAIL", rep.criterion,
                     rep.suite, rep.seconds, detail);
}

}  // namespace rmtail
