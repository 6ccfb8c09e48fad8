#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include "rmtail/errors.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/spectral_curve.hpp"

namespace rmtail {

inline constexpr const char* kGeneratorName = "std::mt19937_64";

struct SamplerConfig {
  RationalPolynomial V = gaussian_potential();
  double t = 1.0;
  int N = 2;
  std::optional<double> wall;
  double step = 0.1;  ///< initial proposal scale, adapted during burn-in
  int sweeps = 1000;  ///< production sweeps after burn-in
  int burn_in = 200;
  int thin = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (V.degree() < 2 || V.degree() % 2 != 0 || V.leading() <= 0)
      throw domain_error("sampler needs an even-degree potential with positive leading coefficient");
    if (!(t > 0)) throw domain_error("coupling t must be positive");
    if (N < 1) throw domain_error("N must be >= 1");
    if (!(step > 0)) throw domain_error("step must be positive");
    if (sweeps < 1 || burn_in < 0 || thin < 1) throw domain_error("sweeps and thin must be positive, burn_in >= 0");
    if (wall && std::isnan(*wall)) throw domain_error("wall is NaN");
  }
};

struct GasState {
  std::vector<double> lambda;  ///< sorted ascending

  double max() const { return *std::max_element(lambda.begin(), lambda.end()); }
};

struct ChainStats {
  double final_step = 0.0;
  double acceptance = 0.0;  ///< production acceptance rate
  long kept = 0;
};

/// Equally spaced points on the unconstrained support, pushed below the wall.
inline GasState initial_state(const SamplerConfig& cfg) {
  double lo, hi;
  try {
    const auto sol = solve_one_cut<double>(cfg.V, cfg.t);
    lo = sol.b;
    hi = sol.a;
  } catch (const std::exception&) {
    const auto sp = saddle_points(cfg.V);
    lo = sp.real_minima.front().x - 1.0;
    hi = sp.real_minima.back().x + 1.0;
  }
  if (cfg.wall && hi > *cfg.wall) {
    hi = *cfg.wall;
    lo = std::min(lo, hi - 1.0);
  }
  GasState s;
  for (int i = 0; i < cfg.N; ++i) s.lambda.push_back(lo + (hi - lo) * (i + 0.5) / cfg.N);
  return s;
}

/// Runs one Metropolis chain of single-coordinate Gaussian proposals on
/// Delta(lambda)^2 exp(-(N/t) sum V(lambda_i)), calling `visit` on every kept
/// (sorted) state. Chain `chain_index` uses seed XOR chain_index.
inline ChainStats run_chain(const SamplerConfig& cfg, GasState state,
                            const std::function<void(const GasState&)>& visit, std::uint64_t chain_index = 0) {
  cfg.validate();
  const int N = cfg.N;
  if (static_cast<int>(state.lambda.size()) != N) throw domain_error("initial state has the wrong size");
  std::vector<double> x = state.lambda;
  std::sort(x.begin(), x.end());
  for (int i = 1; i < N; ++i)
    if (x[i] == x[i - 1]) throw domain_error("initial state has coincident eigenvalues");
  if (cfg.wall)
    for (double v : x)
      if (v > *cfg.wall) throw domain_error("initial state violates the wall");

  std::mt19937_64 gen(cfg.seed ^ chain_index);
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_01<double> uniform;
  const auto V = cfg.V.cast<double>();
  const double beta = N / cfg.t;
  double step = cfg.step;
  std::vector<double> vx(N);
  for (int i = 0; i < N; ++i) vx[i] = V(x[i]);

  long accepted = 0, proposed = 0;
  auto sweep = [&] {
    for (int i = 0; i < N; ++i) {
      const double xi = x[i];
      const double y = xi + step * normal(gen);
      ++proposed;
      if (cfg.wall && y > *cfg.wall) continue;
      const double vy = V(y);
      double delta = -beta * (vy - vx[i]);
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        delta += 2.0 * (std::log(std::abs(y - x[j])) - std::log(std::abs(xi - x[j])));
      }
      if (delta >= 0 || std::log(uniform(gen)) < delta) {
        x[i] = y;
        vx[i] = vy;
        ++accepted;
      }
    }
  };

  const int window = 50;
  for (int s = 1; s <= cfg.burn_in; ++s) {
    sweep();
    if (s % window == 0) {
      const double rate = static_cast<double>(accepted) / proposed;
      step *= std::exp(std::clamp(rate - 0.35, -0.3, 0.3) * 2);
      accepted = proposed = 0;
    }
  }
  accepted = proposed = 0;
  ChainStats stats;
  GasState out;
  for (int s = 1; s <= cfg.sweeps; ++s) {
    sweep();
    if (s % cfg.thin == 0) {
      out.lambda = x;
      std::sort(out.lambda.begin(), out.lambda.end());
      visit(out);
      ++stats.kept;
    }
  }
  stats.final_step = step;
  stats.acceptance = proposed ? static_cast<double>(accepted) / proposed : 0.0;
  return stats;
}

inline std::vector<GasState> sample(const SamplerConfig& cfg, ChainStats* stats = nullptr) {
  std::vector<GasState> out;
  out.reserve(static_cast<std::size_t>(cfg.sweeps / std::max(cfg.thin, 1)));
  const auto st = run_chain(cfg, initial_state(cfg), [&](const GasState& s) { out.push_back(s); });
  if (stats) *stats = st;
  return out;
}

/// Independent chains on separate threads; results concatenated in chain order.
inline std::vector<GasState> sample_chains(const SamplerConfig& cfg, int chains) {
  if (chains < 1) throw domain_error("need at least one chain");
  std::vector<std::vector<GasState>> parts(static_cast<std::size_t>(chains));
  std::vector<std::thread> pool;
  for (int c = 0; c < chains; ++c) {
    pool.emplace_back([&, c] {
      run_chain(cfg, initial_state(cfg), [&](const GasState& s) { parts[c].push_back(s); },
                static_cast<std::uint64_t>(c));
    });
  }
  for (auto& th : pool) th.join();
  std::vector<GasState> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
  std::vector<double> centers;
  std::vector<double> density;
  std::vector<double> stderr_;
  double outside_fraction = 0.0;

  double integral() const {
    double acc = 0.0;
    for (double d : density) acc += d * width;
    return acc;
  }
};

namespace detail {

inline std::size_t batch_count(std::size_t n) { return std::max<std::size_t>(2, std::min<std::size_t>(50, n / 10)); }

}  // namespace detail

/// Pooled eigenvalue histogram on [lo, hi) normalized over all eigenvalues.
/// Standard errors by batch means over consecutive states.
inline Histogram empirical_density(const std::vector<GasState>& states, double lo, double hi, int bins) {
  if (states.empty()) throw domain_error("empirical_density: no states");
  if (states.size() < 100) throw domain_error("empirical_density: need at least 100 states");
  if (!(hi > lo) || bins < 1) throw domain_error("empirical_density: bad binning");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) h.centers.push_back(lo + (b + 0.5) * h.width);
  const std::size_t nb = detail::batch_count(states.size());
  const std::size_t per = states.size() / nb;
  std::vector<std::vector<double>> batch(nb, std::vector<double>(bins, 0.0));
  std::vector<double> total(bins, 0.0);
  double outside = 0.0, count = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::size_t k = std::min(s / std::max<std::size_t>(per, 1), nb - 1);
    for (double v : states[s].lambda) {
      count += 1;
      const double pos = (v - lo) / h.width;
      if (pos < 0 || pos >= bins) {
        outside += 1;
        continue;
      }
      const int b = static_cast<int>(pos);
      total[b] += 1;
      batch[k][b] += 1;
    }
  }
  const double N = static_cast<double>(states.front().lambda.size());
  for (int b = 0; b < bins; ++b) {
    h.density.push_back(total[b] / (count * h.width));
    std::vector<double> means;
    for (std::size_t k = 0; k < nb; ++k) {
      const double n_states = k + 1 == nb ? static_cast<double>(states.size() - per * (nb - 1)) : per;
      means.push_back(batch[k][b] / (n_states * N * h.width));
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= nb;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= (nb - 1);
    h.stderr_.push_back(std::sqrt(var / nb));
  }
  h.outside_fraction = outside / count;
  return h;
}

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct LambdaMaxSummary {
  Estimate mean;
  std::vector<double> quantile_levels;
  std::vector<Estimate> quantiles;
  std::vector<double> cdf_points;
  std::vector<Estimate> cdf;
  long samples = 0;
};

/// Plug-in estimators for lambda_max with block-bootstrap errors
/// (200 resamples, blocks of ~n^{1/3} consecutive states).
inline LambdaMaxSummary lambda_max_stats(const std::vector<GasState>& states, const std::vector<double>& z_points = {},
                                         std::uint64_t seed = 0) {
  if (states.size() < 100) throw domain_error("lambda_max_stats: need at least 100 states");
  const std::size_t n = states.size();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = states[i].max();

  LambdaMaxSummary out;
  out.samples = static_cast<long>(n);
  out.quantile_levels = {0.05, 0.25, 0.5, 0.75, 0.95};
  out.cdf_points = z_points;

  auto estimate = [&](const std::vector<double>& v, std::vector<double>& scratch) {
    std::vector<double> r;
    double sum = 0.0;
    for (double x : v) sum += x;
    r.push_back(sum / v.size());
    scratch = v;
    for (double q : out.quantile_levels) {
      const auto k = static_cast<std::size_t>(std::min<double>(q * (v.size() - 1), v.size() - 1));
      std::nth_element(scratch.begin(), scratch.begin() + k, scratch.end());
      r.push_back(scratch[k]);
    }
    for (double z : z_points) {
      std::size_t c = 0;
      for (double x : v) c += x < z;
      r.push_back(static_cast<double>(c) / v.size());
    }
    return r;
  };

  std::vector<double> scratch;
  const auto point = estimate(m, scratch);
  const std::size_t block = std::max<std::size_t>(1, static_cast<std::size_t>(std::cbrt(static_cast<double>(n))));
  const std::size_t blocks = n / block;
  std::mt19937_64 gen(seed);
  boost::random::uniform_int_distribution<std::size_t> pick(0, blocks - 1);
  std::vector<double> sum(point.size(), 0.0), sumsq(point.size(), 0.0);
  const int resamples = 200;
  std::vector<double> res(blocks * block);
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t src = pick(gen) * block;
      std::copy(m.begin() + src, m.begin() + src + block, res.begin() + b * block);
    }
    const auto e = estimate(res, scratch);
    for (std::size_t i = 0; i < e.size(); ++i) {
      sum[i] += e[i];
      sumsq[i] += e[i] * e[i];
    }
  }
  std::vector<Estimate> all;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double mu = sum[i] / resamples;
    all.push_back({point[i], std::sqrt(std::max(0.0, sumsq[i] / resamples - mu * mu))});
  }
  out.mean = all[0];
  out.quantiles.assign(all.begin() + 1, all.begin() + 1 + out.quantile_levels.size());
  out.cdf.assign(all.begin() + 1 + out.quantile_levels.size(), all.end());
  return out;
}

/// Kolmogorov-Smirnov distance between the pooled eigenvalues and `cdf`.
inline double ks_distance(const std::vector<GasState>& states, const std::function<double(double)>& cdf) {
  std::vector<double> all;
  for (const auto& s : states) all.insert(all.end(), s.lambda.begin(), s.lambda.end());
  if (all.empty()) throw domain_error("ks_distance: no samples");
  std::sort(all.begin(), all.end());
  const double n = static_cast<double>(all.size());
  double d = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double F = cdf(all[i]);
    d = std::max({d, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  return d;
}

/// Semicircle CDF on [-2 sqrt(t), 2 sqrt(t)].
inline double semicircle_cdf(double x, double t = 1.0) {
  const double R = 2 * std::sqrt(t);
  if (x <= -R) return 0.0;
  if (x >= R) return 1.0;
  const double u = x / R;
  return 0.5 + (u * std::sqrt(1 - u * u) + std::asin(u)) / M_PI;
}

/// One row per state, columns lambda_1..lambda_N ascending, 17 significant digits.
inline void write_samples_csv(std::ostream& os, const std::vector<GasState>& states) {
  if (states.empty()) return;
  const std::size_t N = states.front().lambda.size();
  for (std::size_t i = 0; i < N; ++i) os << (i ? "," : "") << "lambda_" << (i + 1);
  os << '\n';
  for (const auto& s : states) {
    for (std::size_t i = 0; i < N; ++i) os << (i ? "," : "") << fmt::format("{:.16e}", s.lambda[i]);
    os << '\n';
  }
}

}  // namespace rmtail
