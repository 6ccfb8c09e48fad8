#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using rmtail::cli::run_cli;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run rmtail_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

// Non-comment CSV lines split into cells.
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : split(csv, '\n'))
    if (!line.empty() && line[0] != '#') out.push_back(split(line, ','));
  return out;
}

double num(const std::string& s) { return std::stod(s); }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rmtail_test_cli_" + name)).string();
}

}  // namespace

TEST(PotentialCommand, MulticriticalCoefficients) {
  const auto r = rmtail_run({"potential", "--family", "multicritical", "--k", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("coefficients (x^0 .. x^4): 0 -16 48 -128/3 64/5"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Sturm count of V'): 1"), std::string::npos);
}

TEST(PotentialCommand, GaussianMinimumAtZero) {
  const auto r = rmtail_run({"potential", "--family", "gaussian", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["coefficients"], nlohmann::json({"0", "0", "1/2"}));
  ASSERT_EQ(j["minima"].size(), 1u);
  EXPECT_EQ(j["minima"][0]["x"].get<double>(), 0.0);
  EXPECT_EQ(j["maxima"].size(), 0u);
}

TEST(PotentialCommand, RejectsNegativeOrder) {
  const auto r = rmtail_run({"potential", "--k", "-1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("k must be >= 0"), std::string::npos) << r.err;
  EXPECT_EQ(rmtail_run({"potential", "--family", "cubic"}).code, 2);
  EXPECT_EQ(rmtail_run({"potential", "--coeffs", "0,1,1,1"}).code, 2);
  EXPECT_EQ(rmtail_run({"potential", "--coeffs", "0,0,1", "--k", "2"}).code, 2);
}

TEST(SpectralCommand, GaussianEndpoints) {
  const auto r = rmtail_run({"spectral", "--potential", "gaussian", "--t", "1", "--x-grid", "-3:3:7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t[0], (std::vector<std::string>{"b", "a", "t"}));
  EXPECT_NEAR(num(t[1][0]), -2.0, 1e-12);
  EXPECT_NEAR(num(t[1][1]), 2.0, 1e-12);
  EXPECT_EQ(t[2], (std::vector<std::string>{"x", "rho", "y", "heff"}));
  // x = 0: semicircle peak 1/pi, y undefined inside the cut.
  EXPECT_NEAR(num(t[6][1]), 1 / M_PI, 1e-14);
  EXPECT_EQ(t[6][2], "nan");
  // x = 3: y = sqrt(x^2 - 4), symmetric heff.
  EXPECT_NEAR(num(t[9][2]), std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(num(t[3][2]), -std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(num(t[3][3]), num(t[9][3]), 1e-12);
}

TEST(SpectralCommand, QuarticSupport) {
  const auto r = rmtail_run({"spectral", "--potential", "multicritical:1", "--precision", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("precision=30"), std::string::npos);
  const auto t = rows(r.out);
  EXPECT_NEAR(num(t[1][0]), 0.0, 1e-12);
  EXPECT_NEAR(num(t[1][1]), 1.0, 1e-12);
  EXPECT_EQ(t.size(), 3u + 41u);
}

TEST(SpectralCommand, ErrorCodes) {
  EXPECT_EQ(rmtail_run({"spectral", "--x-grid", "0:1"}).code, 2);
  EXPECT_EQ(rmtail_run({"spectral", "--x-grid", "0:1:x"}).code, 2);
  EXPECT_EQ(rmtail_run({"spectral", "--potential", "nosuch"}).code, 2);
  // Double well at small coupling: two disjoint cuts.
  const auto r = rmtail_run({"spectral", "--potential", "coeffs:0,0,-1,0,1/4", "--t", "0.1"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("multi-cut"), std::string::npos);
}

TEST(TailsCommand, GaussianRightAction) {
  const auto r = rmtail_run({"tails", "--side", "right", "--potential", "gaussian", "--t", "1", "--z-grid", "3:3:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (std::vector<std::string>{"z", "value", "method", "quadrature", "flag"}));
  // int_2^3 sqrt(x^2 - 4) dx by midpoint rule in x = 2 + u^2.
  const int n = 200000;
  double oracle = 0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    const double x = 2 + u * u;
    oracle += 2 * u * std::sqrt(x * x - 4) / n;
  }
  EXPECT_NEAR(num(t[1][1]), oracle, 1e-8);
  EXPECT_NEAR(num(t[1][1]), 1.429255, 1e-6);
  EXPECT_EQ(t[1][2], "closed_form");
}

TEST(TailsCommand, GaussianLeftAtOrigin) {
  const auto r = rmtail_run({"tails", "--side", "left", "--t", "0.5", "--z-grid", "0:0:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  // At z = 0 only the logarithm survives: t^2 log(1/sqrt(3)).
  EXPECT_NEAR(num(t[1][1]), -std::log(3.0) / 8, 1e-14);
  EXPECT_NEAR(num(t[1][1]), -0.137327, 1e-6);
}

TEST(TailsCommand, QuarticDualEvaluation) {
  const auto r = rmtail_run({"tails", "--side", "right", "--potential", "multicritical:1", "--z-grid", "1.1:1.5:5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 6u);
  for (std::size_t i = 1; i < t.size(); ++i) {
    EXPECT_EQ(t[i][2], "closed_form");
    EXPECT_NEAR(num(t[i][1]), num(t[i][3]), 1e-8) << t[i][0];
  }
}

TEST(TailsCommand, RowsPastTheEdgeAreFlagged) {
  const auto r = rmtail_run({"tails", "--side", "right", "--z-grid", "1:3:3", "--N", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  EXPECT_EQ(t[0].back(), "logP");
  EXPECT_EQ(t[1][4], "below_edge");
  EXPECT_EQ(t[2][4], "near_edge");
  EXPECT_EQ(t[3][4], "ok");
  EXPECT_LT(num(t[3][5]), 0.0);
  const auto left = rmtail_run({"tails", "--side", "left", "--z-grid", "1:3:3"});
  ASSERT_EQ(left.code, 0);
  const auto l = rows(left.out);
  EXPECT_EQ(l[1][3], "ok");
  EXPECT_EQ(l[3][3], "beyond_edge");
  EXPECT_EQ(num(l[3][1]), 0.0);
}

TEST(GapCommand, TwoByTwo) {
  const auto r = rmtail_run({"gap", "--potential", "gaussian", "--N", "2", "--z-grid", "0:0:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  EXPECT_EQ(t[0], (std::vector<std::string>{"z", "logP", "method", "digits", "hankel", "abs_diff"}));
  EXPECT_NEAR(num(t[1][1]), std::log(0.25 - 1 / (2 * M_PI)), 1e-10);
  EXPECT_NEAR(num(t[1][1]), -2.3986, 1e-4);
}

TEST(GapCommand, FarWallAndHankelColumn) {
  const auto r = rmtail_run({"gap", "--N", "6", "--z-grid", "-0.5:40:5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 6u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LT(num(t[i][5]), 1e-8) << t[i][0];
  EXPECT_LT(std::abs(num(t[5][1])), 1e-12);
  const auto big = rmtail_run({"gap", "--N", "7", "--z-grid", "1:1:1"});
  EXPECT_EQ(rows(big.out)[0].size(), 4u);
}

TEST(GapCommand, PrecisionFailure) {
  const auto r = rmtail_run({"gap", "--N", "3", "--z-grid", "0:1:2", "--precision", "300"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("--precision"), std::string::npos);
  EXPECT_EQ(rmtail_run({"gap", "--N", "0", "--z-grid", "0:1:2"}).code, 2);
}

TEST(Precision, EnvironmentDefault) {
  setenv("RMT_PRECISION", "30", 1);
  const auto r = rmtail_run({"gap", "--N", "2", "--z-grid", "0:0:1"});
  unsetenv("RMT_PRECISION");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("precision=30"), std::string::npos);
  EXPECT_EQ(rows(r.out)[1][3], "30");
}

TEST(SampleCommand, DeterministicDigestsAndReplay) {
  const auto a = temp_path("a.csv"), b = temp_path("b.csv");
  const std::vector<std::string> base{"sample", "--N", "3", "--sweeps", "300", "--seed", "17"};
  auto with_out = [&](const std::string& path) {
    auto v = base;
    v.insert(v.end(), {"--out", path});
    return v;
  };
  ASSERT_EQ(rmtail_run(with_out(a)).code, 0);
  ASSERT_EQ(rmtail_run(with_out(b)).code, 0);
  const auto da = rmtail::cli::sha256_hex(rmtail::cli::read_file(a));
  EXPECT_EQ(da, rmtail::cli::sha256_hex(rmtail::cli::read_file(b)));

  const auto m = nlohmann::json::parse(rmtail::cli::read_file(a + ".manifest.json"));
  EXPECT_EQ(m["outputs"][0]["sha256"], da);
  EXPECT_EQ(m["seed"], 17);
  EXPECT_EQ(m["N"], 3);
  EXPECT_EQ(m["generator"], rmtail::kGeneratorName);
  for (const char* key : {"command_line", "potential", "t", "z_grid", "precision", "tool_version", "timestamp_utc"})
    EXPECT_TRUE(m.contains(key)) << key;

  const auto ok = rmtail_run({"replay", "--manifest", a + ".manifest.json"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("identical"), std::string::npos);

  auto tampered = m;
  tampered["command_line"][6] = "18";
  rmtail::cli::write_file(b + ".manifest.json", tampered.dump());
  EXPECT_EQ(rmtail_run({"replay", "--manifest", b + ".manifest.json"}).code, 1);
  EXPECT_EQ(rmtail_run({"replay", "--manifest", temp_path("missing.json")}).code, 2);
  for (const auto& p : {a, b, a + ".manifest.json", b + ".manifest.json"}) std::filesystem::remove(p);
}

TEST(SampleCommand, WallRespected) {
  const auto r = rmtail_run({"sample", "--N", "4", "--sweeps", "2000", "--seed", "3", "--wall", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  ASSERT_EQ(t[0].back(), "lambda_max");
  ASSERT_EQ(t.size(), 2001u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(num(t[i].back()), 0.0);
}

TEST(SampleCommand, TwoEigenvalueGapProbability) {
  const auto r = rmtail_run({"sample", "--N", "2", "--sweeps", "300000", "--thin", "10", "--seed", "2024"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = rows(r.out);
  const double n = static_cast<double>(t.size() - 1);
  double below = 0;
  for (std::size_t i = 1; i < t.size(); ++i) below += num(t[i].back()) < 0;
  const double p = below / n;
  const double exact = 0.25 - 1 / (2 * M_PI);
  EXPECT_NEAR(p, exact, 3 * std::sqrt(exact * (1 - exact) / n));
}

TEST(SampleCommand, RejectsBadConfig) {
  EXPECT_EQ(rmtail_run({"sample", "--N", "0", "--seed", "1"}).code, 2);
  EXPECT_EQ(rmtail_run({"sample", "--N", "2"}).code, 2);
  EXPECT_EQ(rmtail_run({"sample", "--N", "2", "--seed", "1", "--t", "-1"}).code, 2);
}

TEST(VerifyCommand, SuiteSelection) {
  const auto r = rmtail_run({"verify", "--suite", "gaussian-closed-forms"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("PASS criterion  1 gaussian-closed-forms", 0), 0u) << r.out;
  EXPECT_EQ(rmtail_run({"verify", "--suite", "nosuch"}).code, 2);
}

TEST(Usage, HelpAndUnknownCommands) {
  const auto help = rmtail_run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("lo:hi:count[:log]"), std::string::npos);
  EXPECT_EQ(rmtail_run({}).code, 2);
  EXPECT_EQ(rmtail_run({"frobnicate"}).code, 2);
  EXPECT_EQ(rmtail_run({"tails", "--side", "up", "--z-grid", "0:1:2"}).code, 2);
}
