#include "sphchaos/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sphchaos/errors.hpp"

namespace sphchaos::specfun {

double sphere_volume(int k) {
  if (k < 0) throw DomainError("sphere_volume: negative dimension");
  double h = 0.5 * (k + 1);
  return 2.0 * std::exp(h * std::log(std::numbers::pi) - std::lgamma(h));
}

SphereDim::SphereDim(int d_) : d(d_), mu_d(0.0), mu_dm1(0.0) {
  if (d < 2) throw DomainError("SphereDim: need d >= 2, got " + std::to_string(d));
  mu_d = sphere_volume(d);
  mu_dm1 = sphere_volume(d - 1);
  // Exact values for the common case keep identities tight.
  if (d == 2) {
    mu_d = 4.0 * std::numbers::pi;
    mu_dm1 = 2.0 * std::numbers::pi;
  } else if (d == 3) {
    mu_d = 2.0 * std::numbers::pi * std::numbers::pi;
    mu_dm1 = 4.0 * std::numbers::pi;
  }
}

std::uint64_t dim_harmonics(int ell, const SphereDim& dim) {
  if (ell < 1) throw DomainError("dim_harmonics: need ell >= 1");
  using u128 = unsigned __int128;
  const u128 limit = std::numeric_limits<std::uint64_t>::max();
  // binom(ell+d-2, d-1) by the multiplicative formula; every prefix is an
  // exact binomial so the division never truncates.
  const int k = dim.d - 1;
  const std::uint64_t n = static_cast<std::uint64_t>(ell) + dim.d - 2;
  u128 c = 1;
  for (int j = 1; j <= k; ++j) {
    c = c * (n - k + j);
    if (c > limit * 64) throw OverflowError("dim_harmonics: overflow");
    c /= j;
  }
  u128 num = c * (2 * static_cast<u128>(ell) + dim.d - 1);
  u128 value = num / static_cast<u128>(ell);
  if (value > limit) throw OverflowError("dim_harmonics: overflow");
  return static_cast<std::uint64_t>(value);
}

double dim_harmonics_real(int ell, const SphereDim& dim) {
  if (ell == 0) return 1.0;
  try {
    return static_cast<double>(dim_harmonics(ell, dim));
  } catch (const OverflowError&) {
    double lg = std::lgamma(ell + dim.d - 1.0) - std::lgamma(ell + 0.0) - std::lgamma(dim.d + 0.0);
    return (2.0 * ell + dim.d - 1) / ell * std::exp(lg);
  }
}

GegenbauerCtx::GegenbauerCtx(int ell, SphereDim dim) : ell_(ell), dim_(dim) {
  if (ell < 0) throw DomainError("GegenbauerCtx: negative degree");
  const double lambda = 0.5 * (dim.d - 1);
  a_.resize(ell_ + 1);
  c_.resize(ell_ + 1);
  for (int n = 1; n <= ell_; ++n) {
    a_[n] = 2.0 * (n + lambda) / (n + 2.0 * lambda);
    c_[n] = n / (n + 2.0 * lambda);
  }
}

double GegenbauerCtx::eval(double t) const {
  if (ell_ == 0) return 1.0;
  double g0 = 1.0, g1 = t;
  for (int n = 1; n < ell_; ++n) {
    double g2 = a_[n] * t * g1 - c_[n] * g0;
    g0 = g1;
    g1 = g2;
  }
  return g1;
}

void GegenbauerCtx::sequence(double t, double* out) const {
  out[0] = 1.0;
  if (ell_ == 0) return;
  out[1] = t;
  for (int n = 1; n < ell_; ++n) out[n + 1] = a_[n] * t * out[n] - c_[n] * out[n - 1];
}

double gegenbauer(const GegenbauerCtx& ctx, double t) {
  if (!(std::abs(t) <= 1.0 + 1e-12))
    throw DomainError("gegenbauer: argument outside [-1, 1]");
  return ctx.eval(std::clamp(t, -1.0, 1.0));
}

double gegenbauer(int ell, int d, double t) { return gegenbauer(GegenbauerCtx(ell, SphereDim(d)), t); }

double hermite(int q, double t) {
  if (q < 0) throw DomainError("hermite: negative order");
  if (q == 0) return 1.0;
  double h0 = 1.0, h1 = t;
  for (int k = 1; k < q; ++k) {
    double h2 = t * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

void hermite_sequence(int qmax, double t, double* out) {
  out[0] = 1.0;
  if (qmax == 0) return;
  out[1] = t;
  for (int k = 1; k < qmax; ++k) out[k + 1] = t * out[k] - k * out[k - 1];
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

HilbApprox::HilbApprox(int ell_, SphereDim dim_)
    : ell(ell_), dim(dim_), alpha(0.5 * dim_.d - 1.0), L(ell_ + 0.5 * (dim_.d - 1)) {
  if (ell < 1) throw DomainError("HilbApprox: need ell >= 1");
  a_ld = std::exp(std::lgamma(ell + 0.5 * dim.d) - std::lgamma(ell + 1.0) - alpha * std::log(L));
  prefactor = std::exp(alpha * std::log(2.0) - log_binomial(ell + alpha, ell));
}

double HilbApprox::remainder_bound(double theta) const {
  double delta = theta > 1.0 / ell ? std::sqrt(theta) * std::pow(ell, -1.5)
                                   : std::pow(theta, alpha + 2.0) * std::pow(ell, alpha);
  return 2.0 * prefactor * delta / std::pow(std::sin(theta), alpha);
}

double hilb_leading(const HilbApprox& h, double theta) {
  if (!(theta > 0.0 && theta <= 0.5 * std::numbers::pi + 1e-15))
    throw DomainError("hilb_leading: theta outside (0, pi/2]");
  double s = std::sin(theta);
  return h.prefactor * h.a_ld * std::sqrt(theta / s) * bessel_j(h.alpha, h.L * theta) /
         std::pow(s, h.alpha);
}

}  // namespace sphchaos::specfun
