#pragma once

#include <vector>

#include "sphchaos/stats.hpp"

namespace sphchaos::moments {

enum class Range { full, half };  // [0, pi] or [0, pi/2]

struct MomentResult {
  double value = 0.0;
  double err_est = 0.0;
  int panels = 0;
};

struct MomentOptions {
  unsigned threads = 1;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
};

// Integral of G_{l;d}(cos theta)^q (sin theta)^{d-1} over the chosen range.
// Composite Gauss panels of width <= pi/(2(l+1)); the estimate is the
// change under halving the panel width, and the finer sum is reported.
// Throws ToleranceError when three halvings do not meet the tolerance.
MomentResult gegenbauer_moment(int ell, int q, int d, Range range, const MomentOptions& opt = {});

// Var[h_{l;q,d}] = q! mu_d mu_{d-1} int_0^pi G^q sin^{d-1}. q = 0, 1 give 0,
// q = 2 uses the closed form 2 mu_d^2 / n_{l;d}. Memoized per (l, q, d).
double variance_h(int ell, int q, int d, unsigned threads = 1);

enum class Convergence { absolute, conditional };

struct BesselConstant {
  int q = 0;
  int d = 0;
  double c_qd = 0.0;
  Convergence convergence_mode = Convergence::absolute;
  int zeros_used = 0;
  double err_est = 0.0;
};

// c_{q;d} = (2^{d/2-1} (d/2-1)!)^q int_0^inf J_{d/2-1}(psi)^q psi^{-q(d/2-1)+d-1} dpsi,
// and the closed form (d-1)! mu_d / (4 mu_{d-1}) for q = 2. Summed over
// zero-to-zero intervals of J; positive tails (even q) are extrapolated in
// the known powers of the cut-off, alternating tails (odd q) by iterated
// averaging. Memoized.
BesselConstant bessel_constant(int q, int d);

struct RatioRow {
  int ell = 0;
  double moment = 0.0;  // half-range moment
  double err_est = 0.0;
  double ratio = 0.0;   // l^d moment / c_{q;d}
};

std::vector<RatioRow> asymptotic_ratio(int q, int d, const std::vector<int>& ells, unsigned threads = 1);

struct LogDivergence {
  std::vector<int> ells;
  std::vector<double> scaled;  // Var[h_{l;4,2}] l^2
  stats::LinearFit fit;        // against log l
};

// Least-squares slope of Var[h_{l;4,2}] l^2 against log l over a dyadic list
// reaching at least 2^12.
LogDivergence log_divergence_check(const std::vector<int>& ells, unsigned threads = 1);

}  // namespace sphchaos::moments
