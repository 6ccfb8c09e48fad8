#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "rmtail/csv.hpp"
#include "rmtail/grid.hpp"
#include "rmtail/montecarlo.hpp"
#include "rmtail/orthopoly.hpp"
#include "rmtail/potentials.hpp"
#include "rmtail/rate_functions.hpp"
#include "rmtail/spectral_curve.hpp"
#include "rmtail/verify.hpp"

namespace rmtail::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { ok = 0, failure = 1, usage = 2, multi_cut = 3, precision_failure = 4 };

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw numerical_error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw domain_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw domain_error("cannot write " + path);
  out << bytes;
  if (!out) throw domain_error("write failed for " + path);
}

inline std::string utc_timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                  std::chrono::system_clock::now())));
}

// Options shared by the computing subcommands.
struct Common {
  int precision = default_precision();
  std::string out;
  std::string manifest;
  bool no_manifest = false;
  std::string potential = "gaussian";
  double t = 1.0;
};

// What a subcommand produced, before it is written out.
struct Output {
  std::string body;
  nlohmann::json provenance = nlohmann::json::object();
};

inline void add_output_options(CLI::App* sub, Common& c) {
  sub->add_option("--precision", c.precision, "decimal digits of working precision (default RMT_PRECISION or 16)")
      ->check(CLI::Range(1, 1000));
  sub->add_option("--out", c.out, "write CSV here instead of stdout");
  sub->add_option("--manifest", c.manifest, "manifest path (default <out>.manifest.json)");
  sub->add_flag("--no-manifest", c.no_manifest)->group("");
}

inline void add_model_options(CLI::App* sub, Common& c) {
  sub->add_option("--potential", c.potential, "gaussian | multicritical:K | coeffs:c0,c1,...")
      ->capture_default_str();
  sub->add_option("--t", c.t, "coupling t")->capture_default_str();
}

inline PotentialSpec model(const Common& c) {
  auto spec = parse_potential(c.potential);
  spec.t = c.t;
  spec.validate();
  return spec;
}

inline std::string header(const std::string& command, const PotentialSpec& spec, int precision,
                          std::vector<std::pair<std::string, std::string>> extra = {}) {
  std::ostringstream os;
  std::vector<std::pair<std::string, std::string>> fields{{"rmtail", command},
                                                          {"potential", spec.describe()},
                                                          {"t", format_real(spec.t)}};
  fields.insert(fields.end(), extra.begin(), extra.end());
  fields.emplace_back("precision", std::to_string(precision));
  write_comment(os, fields);
  return os.str();
}

template <class Real>
std::string cell(const Real& x) {
  return format_real(static_cast<double>(x));
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

inline void potential_text(std::ostream& os, const PotentialSpec& spec) {
  const auto V = spec.polynomial();
  const auto s = saddle_points(V);
  os << "potential: " << spec.describe() << "\n";
  os << "V(x) = " << to_string(V) << "\n";
  os << "coefficients (x^0 .. x^" << V.degree() << "):";
  for (int i = 0; i <= V.degree(); ++i) os << ' ' << V[i].str();
  os << "\n";
  os << "real critical points (Sturm count of V'): " << count_real_roots(derivative(V)) << "\n";
  auto list = [&](const char* label, const std::vector<CriticalPoint>& pts) {
    for (const auto& p : pts)
      os << fmt::format("  {:<10} x = {:.12g}  V = {:.12g}  multiplicity {}\n", label, p.x, p.value,
                        p.multiplicity);
  };
  list("minimum", s.real_minima);
  list("maximum", s.real_maxima);
  list("inflection", s.stationary_inflections);
  for (const auto& z : s.complex_saddles)
    os << fmt::format("  {:<10} x = {:.12g} +- {:.12g}i\n", "complex", z.real(), z.imag());
}

inline nlohmann::json potential_json(const PotentialSpec& spec) {
  const auto V = spec.polynomial();
  const auto s = saddle_points(V);
  nlohmann::json j;
  j["potential"] = spec.describe();
  j["polynomial"] = to_string(V);
  j["coefficients"] = nlohmann::json::array();
  for (int i = 0; i <= V.degree(); ++i) j["coefficients"].push_back(V[i].str());
  j["sturm_real_critical_points"] = count_real_roots(derivative(V));
  auto points = [](const std::vector<CriticalPoint>& pts) {
    auto a = nlohmann::json::array();
    for (const auto& p : pts) a.push_back({{"x", p.x}, {"value", p.value}, {"multiplicity", p.multiplicity}});
    return a;
  };
  j["minima"] = points(s.real_minima);
  j["maxima"] = points(s.real_maxima);
  j["inflections"] = points(s.stationary_inflections);
  j["complex_saddles"] = nlohmann::json::array();
  for (const auto& z : s.complex_saddles) j["complex_saddles"].push_back({z.real(), z.imag()});
  return j;
}

inline Output spectral_body(const Common& c, const std::string& grid_text) {
  const auto spec = model(c);
  std::optional<GridSpec> grid;
  if (!grid_text.empty()) grid = parse_grid(grid_text);
  Output o;
  o.body = with_precision(c.precision, [&](auto tag) {
    using Real = typename decltype(tag)::type;
    const auto sol = solve_one_cut<Real>(spec.polynomial(), Real(spec.t));
    const double b = static_cast<double>(sol.b), a = static_cast<double>(sol.a);
    const auto g = grid ? *grid : GridSpec{b - 0.25 * (a - b), a + 0.25 * (a - b), 41, false};
    std::ostringstream os;
    os << header("spectral", spec, c.precision, {{"x_grid", g.str()}});
    write_row(os, {"b", "a", "t"});
    write_row(os, {cell(sol.b), cell(sol.a), cell(sol.t)});
    write_row(os, {"x", "rho", "y", "heff"});
    for (double xd : g.values()) {
      const Real x(xd);
      std::string y = "nan";
      if (x >= sol.a) {
        y = cell(y_curve(sol, x));
      } else if (x <= sol.b) {
        using std::sqrt;
        y = cell(Real(-sol.M(x) * sqrt((sol.b - x) * (sol.a - x))));
      }
      write_row(os, {format_real(xd), cell(density(sol, x).rho), y, cell(heff(sol, x))});
    }
    return os.str();
  });
  o.provenance["x_grid"] = grid ? nlohmann::json(grid->str()) : nlohmann::json(nullptr);
  return o;
}

inline Output tails_body(const Common& c, const std::string& side, const std::string& grid_text,
                         std::optional<int> N) {
  const auto spec = model(c);
  const auto grid = parse_grid(grid_text);
  if (N && *N < 1) throw domain_error("--N must be positive");
  const auto V = spec.polynomial();
  const bool gaussian = V == gaussian_potential();
  const bool v1 = V == multicritical_potential(1);
  Output o;
  o.body = with_precision(c.precision, [&](auto tag) {
    using Real = typename decltype(tag)::type;
    std::ostringstream os;
    std::vector<std::pair<std::string, std::string>> extra{{"side", side}, {"z_grid", grid.str()}};
    if (N) extra.emplace_back("N", std::to_string(*N));
    os << header("tails", spec, c.precision, extra);
    const Real t(spec.t);
    if (side == "left") {
      write_row(os, {"z", "value", "method", "flag"});
      for (double zd : grid.values()) {
        if (gaussian) {
          using std::sqrt;
          const Real z(zd);
          const bool outside = z >= 2 * sqrt(t);
          write_row(os, {format_real(zd), cell(gaussian_left_F(z, t)), to_string(Method::closed_form),
                         outside ? "beyond_edge" : "ok"});
        } else {
          const auto r = left_tail_general(V, spec.t, zd);
          write_row(os, {format_real(zd), format_real(r.value), to_string(r.method),
                         r.out_of_range ? "beyond_edge" : "ok"});
        }
      }
      return os.str();
    }
    const auto sol = solve_one_cut<Real>(V, t);
    std::vector<std::string> cols{"z", "value", "method", "quadrature", "flag"};
    if (N) cols.push_back("logP");
    write_row(os, cols);
    for (double zd : grid.values()) {
      const Real z(zd);
      std::vector<std::string> row{format_real(zd)};
      if (z < sol.a) {
        row.insert(row.end(), {"nan", to_string(gaussian || v1 ? Method::closed_form : Method::spectral_curve), "nan",
                               "below_edge"});
        if (N) row.push_back("nan");
        write_row(os, row);
        continue;
      }
      const Real quad = instanton_action(sol, z).A;
      if (gaussian || v1) {
        const Real closed = gaussian ? gaussian_action(t, z) : multicritical_action(sol, z);
        row.insert(row.end(), {cell(closed), to_string(Method::closed_form), cell(quad)});
      } else {
        row.insert(row.end(), {cell(quad), to_string(Method::spectral_curve), cell(quad)});
      }
      std::string flag = "ok";
      std::string logp;
      if (N) {
        try {
          logp = cell(right_tail_log_prob(sol, z, *N));
        } catch (const domain_error&) {
          logp = "nan";
          flag = "near_edge";
        }
      }
      row.push_back(flag);
      if (N) row.push_back(logp);
      write_row(os, row);
    }
    return os.str();
  });
  o.provenance["z_grid"] = grid.str();
  o.provenance["N"] = N ? nlohmann::json(*N) : nlohmann::json(nullptr);
  return o;
}

inline Output gap_body(const Common& c, int N, const std::string& grid_text) {
  const auto spec = model(c);
  const auto grid = parse_grid(grid_text);
  if (N < 1) throw domain_error("--N must be positive");
  const bool with_hankel = N <= 6;
  std::ostringstream os;
  os << header("gap", spec, c.precision, {{"N", std::to_string(N)}, {"z_grid", grid.str()}});
  std::vector<std::string> cols{"z", "logP", "method", "digits"};
  if (with_hankel) cols.insert(cols.end(), {"hankel", "abs_diff"});
  write_row(os, cols);
  for (double z : grid.values()) {
    const TruncatedWeight w{spec.polynomial(), spec.t, N, z, c.precision};
    const auto g = log_gap_probability(w);
    std::vector<std::string> row{format_real(z), format_real(g.logP), to_string(g.method),
                                 std::to_string(g.precision)};
    if (with_hankel) {
      const auto h = hankel_log_gap(w);
      row.push_back(format_real(h.logP));
      row.push_back(format_real(std::abs(g.logP - h.logP)));
    }
    write_row(os, row);
  }
  Output o;
  o.body = os.str();
  o.provenance["z_grid"] = grid.str();
  o.provenance["N"] = N;
  return o;
}

struct SampleOptions {
  int N = 2;
  int sweeps = 1000;
  int burn_in = 200;
  int thin = 1;
  int chains = 1;
  double step = 0.1;
  std::uint64_t seed = 0;
  std::optional<double> wall;
};

inline Output sample_body(const Common& c, const SampleOptions& s, std::ostream& err) {
  const auto spec = model(c);
  if (s.chains < 1) throw domain_error("--chains must be positive");
  SamplerConfig cfg;
  cfg.V = spec.polynomial();
  cfg.t = spec.t;
  cfg.N = s.N;
  cfg.wall = s.wall;
  cfg.step = s.step;
  cfg.sweeps = s.sweeps;
  cfg.burn_in = s.burn_in;
  cfg.thin = s.thin;
  cfg.seed = s.seed;
  cfg.validate();
  const auto states = sample_chains(cfg, s.chains);

  std::ostringstream os;
  os << header("sample", spec, c.precision,
               {{"N", std::to_string(s.N)},
                {"sweeps", std::to_string(s.sweeps)},
                {"burn_in", std::to_string(s.burn_in)},
                {"thin", std::to_string(s.thin)},
                {"chains", std::to_string(s.chains)},
                {"seed", std::to_string(s.seed)},
                {"wall", s.wall ? format_real(*s.wall) : "none"},
                {"generator", kGeneratorName}});
  std::vector<std::string> cols;
  for (int i = 1; i <= s.N; ++i) cols.push_back("lambda_" + std::to_string(i));
  cols.push_back("lambda_max");
  write_row(os, cols);
  for (const auto& st : states) {
    std::vector<std::string> row;
    for (double x : st.lambda) row.push_back(format_real(x));
    row.push_back(format_real(st.max()));
    write_row(os, row);
  }
  if (states.size() >= 100) {
    const auto m = lambda_max_stats(states, {}, s.seed);
    err << fmt::format("samples={} mean lambda_max={:.6f} +- {:.6f}\n", states.size(), m.mean.value, m.mean.error);
  }
  Output o;
  o.body = os.str();
  o.provenance["N"] = s.N;
  o.provenance["seed"] = s.seed;
  o.provenance["generator"] = kGeneratorName;
  return o;
}

// Writes the CSV and its manifest. With neither --out nor --manifest the
// CSV goes to stdout and no manifest is written.
inline void emit(const Common& c, const std::vector<std::string>& args, const std::string& command,
                 const Output& o, std::ostream& out) {
  if (c.out.empty()) {
    out << o.body;
  } else {
    write_file(c.out, o.body);
  }
  if (c.no_manifest) return;
  std::string path = c.manifest;
  if (path.empty()) {
    if (c.out.empty()) return;
    path = c.out + ".manifest.json";
  }
  nlohmann::json m;
  m["command"] = command;
  m["command_line"] = args;
  m["potential"] = c.potential;
  m["t"] = c.t;
  for (const char* key : {"N", "z_grid", "x_grid", "seed", "generator"})
    m[key] = o.provenance.contains(key) ? o.provenance[key] : nlohmann::json(nullptr);
  m["precision"] = c.precision;
  m["tool_version"] = kToolVersion;
  m["timestamp_utc"] = utc_timestamp();
  m["outputs"] = nlohmann::json::array({{{"path", c.out.empty() ? "-" : c.out},
                                         {"sha256", sha256_hex(o.body)},
                                         {"bytes", o.body.size()}}});
  write_file(path, m.dump(2) + "\n");
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Re-runs a manifest's command into a temporary file and compares digests.
inline int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw domain_error("malformed manifest " + manifest_path + ": " + e.what());
  }
  if (!m.contains("command_line") || !m.contains("outputs") || m["outputs"].empty())
    throw domain_error("manifest " + manifest_path + " lacks command_line or outputs");
  const auto original = m["command_line"].get<std::vector<std::string>>();
  const std::string expected = m["outputs"][0]["sha256"].get<std::string>();

  std::vector<std::string> args;
  bool has_precision = false;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const auto& a = original[i];
    if (a == "--out" || a == "--manifest") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--manifest=", 0) == 0 || a == "--no-manifest") continue;
    if (a == "--precision" || a.rfind("--precision=", 0) == 0) has_precision = true;
    args.push_back(a);
  }
  if (!has_precision && m.contains("precision"))
    args.insert(args.end(), {"--precision", std::to_string(m["precision"].get<int>())});
  const auto tmp = std::filesystem::temp_directory_path() /
                   fmt::format("rmtail-replay-{:016x}.csv", std::random_device{}() * 0x9e3779b97f4a7c15ull);
  args.insert(args.end(), {"--out", tmp.string(), "--no-manifest"});

  std::ostringstream sink;
  const int code = run_cli(args, sink, err);
  if (code != 0) {
    std::filesystem::remove(tmp);
    err << "rmtail: replay: command exited with " << code << "\n";
    return code;
  }
  const std::string got = sha256_hex(read_file(tmp.string()));
  std::filesystem::remove(tmp);
  if (got != expected) {
    out << "replay MISMATCH expected sha256=" << expected << " got sha256=" << got << "\n";
    return failure;
  }
  out << "replay identical sha256=" << got << "\n";
  return ok;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Largest-eigenvalue tails of Hermitian matrix models with polynomial potentials"};
  app.name("rmtail");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.footer(
      "Grids: lo:hi:count[:log], both ends included; ':log' spaces points geometrically.\n"
      "Exit codes: 0 ok, 2 usage, 3 multi-cut equilibrium, 4 precision failure.\n"
      "RMT_PRECISION sets the default --precision.");

  Common common;

  auto* pot = app.add_subcommand("potential", "coefficients, critical points and Sturm count of V");
  std::string family;
  std::optional<int> k;
  std::string coeffs;
  bool json = false;
  pot->add_option("--family", family, "gaussian | multicritical")->check(CLI::IsMember({"gaussian", "multicritical"}));
  pot->add_option("--k", k, "multicritical order");
  pot->add_option("--coeffs", coeffs, "comma-separated coefficients c0,c1,... (rationals allowed)");
  pot->add_flag("--json", json, "print JSON instead of text");
  pot->add_option("--out", common.out, "write here instead of stdout");

  auto* spectral = app.add_subcommand("spectral", "one-cut equilibrium measure on a grid");
  std::string x_grid;
  add_model_options(spectral, common);
  spectral->add_option("--x-grid", x_grid, "lo:hi:count[:log] (default: the cut padded by a quarter width)");
  add_output_options(spectral, common);

  auto* tails = app.add_subcommand("tails", "left rate function or right action");
  std::string side;
  std::string z_grid;
  std::optional<int> tails_N;
  tails->add_option("--side", side, "left | right")->required()->check(CLI::IsMember({"left", "right"}));
  add_model_options(tails, common);
  tails->add_option("--z-grid", z_grid, "lo:hi:count[:log]")->required();
  tails->add_option("--N", tails_N, "matrix size for the right-tail log probability");
  add_output_options(tails, common);

  auto* gap = app.add_subcommand("gap", "finite-N log P(lambda_max < z) from orthogonal polynomials");
  int gap_N = 0;
  add_model_options(gap, common);
  gap->add_option("--N", gap_N, "matrix size")->required();
  gap->add_option("--z-grid", z_grid, "lo:hi:count[:log]")->required();
  add_output_options(gap, common);

  auto* samp = app.add_subcommand("sample", "Metropolis samples of the eigenvalue gas");
  SampleOptions so;
  add_model_options(samp, common);
  samp->add_option("--N", so.N, "number of eigenvalues")->required();
  samp->add_option("--sweeps", so.sweeps, "production sweeps per chain")->capture_default_str();
  samp->add_option("--burn-in", so.burn_in, "adaptive burn-in sweeps")->capture_default_str();
  samp->add_option("--thin", so.thin, "keep every thin-th sweep")->capture_default_str();
  samp->add_option("--chains", so.chains, "independent chains, seeded seed^index")->capture_default_str();
  samp->add_option("--step", so.step, "initial proposal scale")->capture_default_str();
  samp->add_option("--seed", so.seed, "64-bit seed")->required();
  samp->add_option("--wall", so.wall, "hard wall: all eigenvalues stay below it");
  add_output_options(samp, common);

  auto* verify = app.add_subcommand("verify", "run acceptance suites");
  std::vector<std::string> suites;
  verify->add_option("--suite", suites, "suite name (repeatable; default all)");

  auto* rep = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  std::string replay_manifest;
  rep->add_option("--manifest", replay_manifest, "manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*pot) {
      PotentialSpec spec;
      if (!coeffs.empty()) {
        if (!family.empty() || k) throw domain_error("--coeffs excludes --family and --k");
        spec = parse_potential("coeffs:" + coeffs);
      } else if (family == "multicritical" || (family.empty() && k)) {
        if (!k) throw domain_error("--family multicritical needs --k");
        if (*k < 0) throw domain_error("multicritical order k must be >= 0, got " + std::to_string(*k));
        spec.family = PotentialSpec::Family::multicritical;
        spec.k = *k;
      } else if (k) {
        throw domain_error("--k applies only to --family multicritical");
      }
      spec.validate();
      std::ostringstream os;
      if (json) {
        os << potential_json(spec).dump(2) << "\n";
      } else {
        potential_text(os, spec);
      }
      if (common.out.empty()) {
        out << os.str();
      } else {
        write_file(common.out, os.str());
      }
      return ok;
    }
    if (*spectral) {
      emit(common, args, "spectral", spectral_body(common, x_grid), out);
      return ok;
    }
    if (*tails) {
      emit(common, args, "tails", tails_body(common, side, z_grid, tails_N), out);
      return ok;
    }
    if (*gap) {
      emit(common, args, "gap", gap_body(common, gap_N, z_grid), out);
      return ok;
    }
    if (*samp) {
      emit(common, args, "sample", sample_body(common, so, err), out);
      return ok;
    }
    if (*verify) {
      std::vector<const Suite*> selected;
      for (const auto& name : suites) selected.push_back(&find_suite(name));
      if (selected.empty())
        for (const auto& s : acceptance_suites()) selected.push_back(&s);
      int failures = 0;
      for (const auto* s : selected) {
        const auto r = run_suite(*s);
        out << format_report(r) << "\n" << std::flush;
        failures += !r.passed();
      }
      out << (selected.size() - failures) << " of " << selected.size() << " suites passed\n";
      return failures == 0 ? ok : failure;
    }
    if (*rep) return replay(replay_manifest, out, err);
  } catch (const one_cut_violation& e) {
    err << "rmtail: multi-cut equilibrium: " << e.what() << "\n";
    return multi_cut;
  } catch (const precision_error& e) {
    err << "rmtail: precision failure: " << e.what()
        << "\n  retry with a larger --precision (at most 150) or a coarser grid\n";
    return precision_failure;
  } catch (const domain_error& e) {
    err << "rmtail: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    err << "rmtail: error: " << e.what() << "\n";
    return failure;
  }
  return usage;
}

}  // namespace rmtail::cli
