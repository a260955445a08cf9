#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sphchaos/simulate.hpp"

namespace sphchaos::clt {

// sup_z |F_n(z) - Phi(z)|, checked on both sides of every jump.
double kolmogorov_distance(std::vector<double> samples);
// (1/n) sum |X_(i) - Phi^{-1}((i - 1/2)/n)|
double wasserstein_distance(std::vector<double> samples);
// 0.5 / sqrt(n): the scale of Kolmogorov-statistic noise.
double mc_floor(std::size_t n);

struct SweepSpec {
  simulate::FunctionalKind kind = simulate::FunctionalKind::h;
  int d = 2;
  int q = 2;                  // kind h
  std::vector<double> betas;  // kind Z: monomial coefficients b_0..b_Q
  double z = 0.0;             // kind S
  simulate::Side side = simulate::Side::below;
  std::vector<int> ells;
  std::size_t replicas = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool allow_odd = false;
  int excursion_degree_factor = 4;  // grid degree = factor * l for kind S
  std::size_t node_budget = simulate::kDefaultNodeBudget;
  bool keep_samples = false;
};

struct SweepRow {
  int ell = 0;
  std::size_t replicas = 0;
  double empirical_dK = 0.0;
  double empirical_dW = 0.0;
  double mc_stderr_scale = 0.0;
  double theoretical_rate = 0.0;
  double explicit_bound = 0.0;   // Kolmogorov bound; NaN where none is available
  double theory_mean = 0.0;
  double theory_var = 0.0;
  double sample_mean = 0.0;      // raw functional
  double sample_mean_stderr = 0.0;
  double sample_var = 0.0;
  double sample_var_stderr = 0.0;
  double grid_refinement = 0.0;  // kind S on S^2: mean |change| when the grid degree doubles; NaN otherwise
  int grid_degree = 0;
  bool approximate = false;
  std::vector<double> raw;         // per replica, when keep_samples
  std::vector<double> normalized;  // per replica, when keep_samples
};

struct Report {
  simulate::FunctionalKind kind = simulate::FunctionalKind::h;
  int d = 2;
  int q = 0;
  std::vector<double> betas;
  double z = 0.0;
  std::string rate_label;
  std::vector<SweepRow> rows;  // sorted by ell
  std::vector<std::string> warnings;
};

// Stream master for the replicas of multipole ell under a run seed.
std::uint64_t row_seed(std::uint64_t seed, int ell);

// Grid degree used for multipole ell: q l for h, Q l for Z, factor l for S.
int grid_degree(const SweepSpec& spec, int ell);
simulate::FunctionalSample evaluate(const SweepSpec& spec, const simulate::FieldRealization& field);

Report clt_sweep(const SweepSpec& spec);

struct RateFit {
  bool fitted = false;
  std::size_t rows_used = 0;
  std::vector<bool> below_floor;  // per row
  double slope = 0.0;
  double slope_stderr = 0.0;
  double theoretical_slope = 0.0;
  bool consistent = false;  // slope <= theoretical_slope + 2 stderr
};

// Log-log fit of values against ell, excluding rows under 3 mc_floor(replicas)
// (replicas = 0 disables the floor). The theoretical slope is fitted the
// same way from the rate column.
RateFit fit_rate(const std::vector<int>& ells, const std::vector<double>& values,
                 const std::vector<double>& theory, std::size_t replicas);
// Needs at least three rows.
RateFit rate_fit(const Report& report);

}  // namespace sphchaos::clt
