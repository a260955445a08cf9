#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sphchaos/specfun.hpp"

namespace sphchaos::contractions {

// G_{l;d}^p = sum_k coeffs[k] G_{k;d}, k = 0..p l.
struct SpectralCoeffs {
  int ell = 0;
  int p = 0;
  specfun::SphereDim dim{2};
  std::vector<double> coeffs;
};

constexpr int kDefaultDegreeCap = 4096;

// b_k = (mu_{d-1}/mu_d) n_k int_0^pi G_l^p G_k sin^{d-1}, by a Gauss-Jacobi
// rule with p l + 2 nodes (exact for the degree-2pl integrand). Coefficients
// whose parity differs from p l vanish by symmetry and are set to zero.
// Throws BudgetExceeded when p l exceeds the cap. Memoized.
std::shared_ptr<const SpectralCoeffs> expansion(int ell, int p, int d, int degree_cap = kDefaultDegreeCap);
SpectralCoeffs expand_power(int ell, int p, int d, int degree_cap = kDefaultDegreeCap);

// mu_d sum_k (a_k b_k)^2 (mu_d / n_k)^3: the 4-cycle integral of
// G^r G^{q-r} G^r G^{q-r} once a = G^r and b = G^{q-r} are expanded.
double contraction_from_coeffs(const SpectralCoeffs& a, const SpectralCoeffs& b);

struct ContractionTable {
  int ell = 0;
  int q = 0;
  specfun::SphereDim dim{2};
  std::vector<double> K_values;  // K_values[r-1] = K_l(q; r), r = 1..q-1
  double K(int r) const { return K_values.at(r - 1); }
};

ContractionTable contraction_table(int ell, int q, int d);
double kernel_contraction(int ell, int q, int r, int d);

// Squared norm of the full contraction between the order-q1 and order-q2
// kernels: Var[h_{q1}]^2/(q1!)^2 mu_d^2 b_0^{(q2-q1)}, and 0 when q2 = q1+1.
double cross_contraction(int ell, int q1, int q2, int d);

struct BoundRecord {
  double variance = 0.0;       // sigma^2
  double fourth_moment = 0.0;  // (1/q^2) sum_r r^2 r!^2 C(q,r)^4 (2q-2r)! K(q;r)
  double raw = 0.0;            // sqrt(fourth_moment)
  double delta = 0.0;          // raw / sigma^2
  double prefactor_tv = 2.0;
  double prefactor_k = 1.0;
  double prefactor_w = 0.0;    // sqrt(2/pi), for the variance-normalized variable
  double bound_tv = 0.0;
  double bound_k = 0.0;
  double bound_w = 0.0;
};

BoundRecord berry_esseen_bound(int ell, int q, int d);

// l^{-exponent} (log l)^{log_power}
struct Rate {
  double value = 0.0;
  double exponent = 0.0;
  int log_power = 0;
  std::string label;
};

Rate rate_theoretical(int ell, int q, int d);

struct PolyBoundRecord {
  double variance = 0.0;  // sum_q beta_q^2 Var[h_q]
  double raw = 0.0;       // sum_{a,b} |beta_a beta_b| sqrt(V_ab)
  double delta = 0.0;
  double prefactor_tv = 2.0;
  double prefactor_k = 1.0;
  double prefactor_w = 0.0;
  double bound_tv = 0.0;
  double bound_k = 0.0;
  double bound_w = 0.0;
  Rate rate;
  int rate_order = 0;  // chaos order that sets the rate
};

// betas[q] is the coefficient of h_{l;q,d}; entries 0 and 1 are ignored
// (h_0 is the constant mu_d and h_1 vanishes).
PolyBoundRecord poly_bound(int ell, int d, const std::vector<double>& betas);

// The second moment V_{ab} of <D h_a, -D L^{-1} h_b> minus its mean, as used
// by poly_bound; exposed for diagnostics.
double chaos_pair_moment(int ell, int a, int b, int d);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo evaluation of the (S^d)^4 integral defining K_l(q; r) from
// uniform points (normalized Gaussian vectors). Reproducible for a given seed
// irrespective of `threads`.
McEstimate contraction_monte_carlo(int ell, int q, int r, int d, std::size_t samples, std::uint64_t seed,
                                   unsigned threads = 1);

}  // namespace sphchaos::contractions
