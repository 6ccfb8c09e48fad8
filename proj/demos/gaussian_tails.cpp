// Largest eigenvalue of the Gaussian ensemble at N = 20: exact finite-N
// probability against the leading left and right asymptotics.

#include <cmath>

#include <fmt/format.h>

#include "rmtail/rmtail.hpp"

int main() {
  using namespace rmtail;
  const int N = 20;
  const double t = 1.0;
  const auto sol = solve_one_cut<double>(gaussian_potential(), t);
  fmt::print("support [{:.6f}, {:.6f}], N = {}\n\n", sol.b, sol.a, N);
  fmt::print("{:>6} {:>16} {:>16} {:>16}\n", "z", "log P exact", "N^2 F(z)", "right tail");
  for (int i = 0; i <= 16; ++i) {
    const double z = 0.5 + 0.15 * i;
    const double exact = log_gap_probability({gaussian_potential(), t, N, z, 16}).logP;
    std::string left = "", right = "";
    if (z < sol.a) left = fmt::format("{:16.6e}", N * N * gaussian_left_F(z, t) / (t * t));
    if (z > sol.a + 0.05) right = fmt::format("{:16.6e}", right_tail_log_prob(sol, z, N));
    fmt::print("{:6.2f} {:16.6e} {:>16} {:>16}\n", z, exact, left, right);
  }
}
