#pragma once

#include <cstdint>
#include <vector>

namespace sphchaos::specfun {

// Surface measure of the unit k-sphere, 2 pi^{(k+1)/2} / Gamma((k+1)/2).
double sphere_volume(int k);

struct SphereDim {
  int d;
  double mu_d;
  double mu_dm1;
  explicit SphereDim(int d);
};

// n_{l;d}, the dimension of degree-l spherical harmonics on S^d. Exact;
// throws OverflowError when the value does not fit in 64 bits.
std::uint64_t dim_harmonics(int ell, const SphereDim& dim);

// Same value as a double, with n_{0;d} = 1 and a log-gamma fallback past the
// 64-bit range. Used wherever n enters weights of spectral sums.
double dim_harmonics_real(int ell, const SphereDim& dim);

// Normalized Gegenbauer polynomial of degree ell on S^d, G(1) = 1.
// Holds the three-term recurrence coefficients of the normalized family
// for all degrees up to ell, so the same context also yields G_0..G_ell.
class GegenbauerCtx {
 public:
  GegenbauerCtx(int ell, SphereDim dim);

  int ell() const { return ell_; }
  const SphereDim& dim() const { return dim_; }

  // No domain check; callers inside the library pass |t| <= 1.
  double eval(double t) const;
  // out[k] = G_k(t) for k = 0..ell.
  void sequence(double t, double* out) const;

 private:
  int ell_;
  SphereDim dim_;
  std::vector<double> a_;  // 2(n+lambda)/(n+2 lambda)
  std::vector<double> c_;  // n/(n+2 lambda)
};

// Throws DomainError for |t| > 1 + 1e-12.
double gegenbauer(const GegenbauerCtx& ctx, double t);
double gegenbauer(int ell, int d, double t);

// Probabilists' Hermite polynomial.
double hermite(int q, double t);
// out[k] = H_k(t) for k = 0..qmax.
void hermite_sequence(int qmax, double t, double* out);

// Bessel J of integer or half-integer order nu >= -1/2, x >= 0.
double bessel_j(double nu, double x);
// First `count` positive zeros of J_nu.
std::vector<double> bessel_j_zeros(double nu, int count);

// Leading Bessel approximation of G_{l;d}(cos theta) away from the poles.
struct HilbApprox {
  int ell;
  SphereDim dim;
  double alpha;      // d/2 - 1, the Bessel order
  double L;          // l + (d-1)/2
  double a_ld;       // Gamma(l + d/2) / (L^{d/2-1} l!)
  double prefactor;  // 2^{d/2-1} / binom(l + d/2 - 1, l)

  HilbApprox(int ell, SphereDim dim);

  // Bound on |G - hilb_leading| with the O-constant taken as 2: the
  // remainder is sqrt(theta) l^{-3/2} for theta > 1/l and
  // theta^{alpha+2} l^alpha below, both divided by (sin theta)^alpha and
  // scaled like G by the prefactor.
  double remainder_bound(double theta) const;
};

double hilb_leading(const HilbApprox& approx, double theta);

// log of the binomial coefficient for real arguments.
double log_binomial(double n, double k);

}  // namespace sphchaos::specfun
