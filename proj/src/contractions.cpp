#include "sphchaos/contractions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "sphchaos/errors.hpp"
#include "sphchaos/moments.hpp"
#include "sphchaos/parallel.hpp"
#include "sphchaos/quadrature.hpp"
#include "sphchaos/rng.hpp"

namespace sphchaos::contractions {
namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(specfun::log_binomial(n, k)));
}

SpectralCoeffs compute_expansion(int ell, int p, int d) {
  specfun::SphereDim dim(d);
  const int top = p * ell;
  SpectralCoeffs out;
  out.ell = ell;
  out.p = p;
  out.dim = dim;
  out.coeffs.assign(top + 1, 0.0);
  if (p == 0) {
    out.coeffs[0] = 1.0;
    return out;
  }
  const int n = top + 2;
  const auto rule = quadrature::sphere_rule(n, d);
  specfun::GegenbauerCtx base(ell, dim);
  specfun::GegenbauerCtx family(top, dim);

  // Fixed chunking keeps the summation order independent of worker count.
  const int chunk = 64;
  const int chunks = (n + chunk - 1) / chunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(top + 1, 0.0));
  for (int c = 0; c < chunks; ++c) {
    std::vector<double> g(top + 1);
    auto& acc = partial[c];
    for (int i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) {
      double t = rule->nodes[i];
      double gp = std::pow(base.eval(t), p);
      family.sequence(t, g.data());
      double w = rule->weights[i] * gp;
      for (int k = top % 2; k <= top; k += 2) acc[k] += w * g[k];
    }
  }
  const double ratio = dim.mu_dm1 / dim.mu_d;
  for (int k = top % 2; k <= top; k += 2) {
    double s = 0.0;
    for (int c = 0; c < chunks; ++c) s += partial[c][k];
    out.coeffs[k] = ratio * specfun::dim_harmonics_real(k, dim) * s;
  }
  return out;
}

}  // namespace

std::shared_ptr<const SpectralCoeffs> expansion(int ell, int p, int d, int degree_cap) {
  if (ell < 0 || p < 0) throw DomainError("expand_power: need ell, p >= 0");
  if (static_cast<long>(p) * ell > degree_cap)
    throw BudgetExceeded("expand_power: degree p*ell exceeds the cap");
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const SpectralCoeffs>> memo;
  static std::mutex mu;
  const auto key = std::make_tuple(ell, p, d);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  auto value = std::make_shared<const SpectralCoeffs>(compute_expansion(ell, p, d));
  std::lock_guard<std::mutex> lock(mu);
  return memo.emplace(key, value).first->second;
}

SpectralCoeffs expand_power(int ell, int p, int d, int degree_cap) { return *expansion(ell, p, d, degree_cap); }

double contraction_from_coeffs(const SpectralCoeffs& a, const SpectralCoeffs& b) {
  const double mu = a.dim.mu_d;
  const std::size_t top = std::min(a.coeffs.size(), b.coeffs.size());
  double s = 0.0;
  for (std::size_t k = 0; k < top; ++k) {
    double c = a.coeffs[k] * b.coeffs[k];
    if (c == 0.0) continue;
    double w = mu / specfun::dim_harmonics_real(static_cast<int>(k), a.dim);
    s += c * c * w * w * w;
  }
  return mu * s;
}

ContractionTable contraction_table(int ell, int q, int d) {
  if (q < 2) throw DomainError("contraction_table: need q >= 2");
  ContractionTable t;
  t.ell = ell;
  t.q = q;
  t.dim = specfun::SphereDim(d);
  for (int r = 1; r <= q - 1; ++r) {
    // Same operand order for r and q-r, so the symmetry is exact.
    int lo = std::min(r, q - r), hi = std::max(r, q - r);
    t.K_values.push_back(contraction_from_coeffs(*expansion(ell, lo, d), *expansion(ell, hi, d)));
  }
  return t;
}

double kernel_contraction(int ell, int q, int r, int d) {
  if (r < 1 || r > q - 1) throw DomainError("kernel_contraction: need 1 <= r <= q-1");
  int lo = std::min(r, q - r), hi = std::max(r, q - r);
  return contraction_from_coeffs(*expansion(ell, lo, d), *expansion(ell, hi, d));
}

double cross_contraction(int ell, int q1, int q2, int d) {
  if (!(2 <= q1 && q1 < q2)) throw DomainError("cross_contraction: need 2 <= q1 < q2");
  if (q2 - q1 == 1) return 0.0;
  specfun::SphereDim dim(d);
  double v = moments::variance_h(ell, q1, d);
  double b0 = expansion(ell, q2 - q1, d)->coeffs[0];
  double f = factorial(q1);
  return v * v / (f * f) * dim.mu_d * dim.mu_d * b0;
}

namespace {

double diagonal_moment(int ell, int q, int d) {
  ContractionTable t = contraction_table(ell, q, d);
  double s = 0.0;
  for (int r = 1; r <= q - 1; ++r) {
    double c = binom(q, r);
    double fr = factorial(r);
    s += r * r * fr * fr * c * c * c * c * factorial(2 * q - 2 * r) * t.K(r);
  }
  return s / (q * q);
}

}  // namespace

double chaos_pair_moment(int ell, int a, int b, int d) {
  if (a < 2 || b < 2) throw DomainError("chaos_pair_moment: orders must be >= 2");
  if (a == b) return diagonal_moment(ell, a, d);
  if (a > b) return (static_cast<double>(a) / b) * (static_cast<double>(a) / b) * chaos_pair_moment(ell, b, a, d);
  // a < b: full contraction term plus the partial ones.
  double fa = factorial(a - 1);
  double cb = binom(b - 1, a - 1);
  double A = a * a * fa * fa * cb * cb * factorial(b - a) * cross_contraction(ell, a, b, d);
  double B = 0.0;
  for (int r = 1; r <= a - 1; ++r) {
    double fr = factorial(r - 1);
    double c1 = binom(a - 1, r - 1), c2 = binom(b - 1, r - 1);
    B += fr * fr * c1 * c1 * c2 * c2 * factorial(a + b - 2 * r) *
         (kernel_contraction(ell, a, r, d) + kernel_contraction(ell, b, r, d));
  }
  B *= 0.5 * a * a;
  return A + B;
}

BoundRecord berry_esseen_bound(int ell, int q, int d) {
  if (q < 2) throw DomainError("berry_esseen_bound: need q >= 2");
  BoundRecord rec;
  rec.variance = moments::variance_h(ell, q, d);
  if (rec.variance <= 0.0) throw ZeroVariance("berry_esseen_bound: h vanishes identically (odd l, odd q)");
  rec.fourth_moment = diagonal_moment(ell, q, d);
  rec.raw = std::sqrt(rec.fourth_moment);
  rec.delta = rec.raw / rec.variance;
  rec.prefactor_w = std::sqrt(2.0 / std::numbers::pi);
  rec.bound_tv = rec.prefactor_tv * rec.delta;
  rec.bound_k = rec.prefactor_k * rec.delta;
  rec.bound_w = rec.prefactor_w * rec.delta;
  return rec;
}

Rate rate_theoretical(int ell, int q, int d) {
  if (q < 2 || d < 2) throw DomainError("rate_theoretical: need q >= 2 and d >= 2");
  if (ell < 2) throw DomainError("rate_theoretical: need ell >= 2");
  Rate r;
  if (d == 2) {
    if (q <= 3) {
      r.exponent = 0.5;
      r.label = "l^(-1/2)";
    } else if (q == 4) {
      r.log_power = -1;
      r.label = "(log l)^(-1)";
    } else if (q <= 6) {
      r.exponent = 0.25;
      r.log_power = 1;
      r.label = "(log l) l^(-1/4)";
    } else {
      r.exponent = 0.25;
      r.label = "l^(-1/4)";
    }
  } else {
    r.exponent = q == 2 ? 0.5 * (d - 1) : q == 3 ? 0.25 * (d - 5) : q == 4 ? 0.25 * (d - 3) : 0.25 * (d - 1);
    r.label = q == 2 ? "l^(-(d-1)/2)" : q == 3 ? "l^(-(d-5)/4)" : q == 4 ? "l^(-(d-3)/4)" : "l^(-(d-1)/4)";
  }
  double L = static_cast<double>(ell);
  r.value = std::pow(L, -r.exponent) * std::pow(std::log(L), r.log_power);
  return r;
}

PolyBoundRecord poly_bound(int ell, int d, const std::vector<double>& betas) {
  std::vector<int> active;
  PolyBoundRecord rec;
  for (int q = 2; q < static_cast<int>(betas.size()); ++q) {
    if (betas[q] == 0.0) continue;
    double v = moments::variance_h(ell, q, d);
    if (v <= 0.0) continue;  // h_q vanishes identically
    active.push_back(q);
    rec.variance += betas[q] * betas[q] * v;
  }
  if (active.empty()) throw ZeroVariance("poly_bound: no nonzero chaos component");
  for (int a : active)
    for (int b : active)
      rec.raw += std::abs(betas[a] * betas[b]) * std::sqrt(chaos_pair_moment(ell, a, b, d));
  rec.delta = rec.raw / rec.variance;
  rec.prefactor_w = std::sqrt(2.0 / std::numbers::pi);
  rec.bound_tv = rec.prefactor_tv * rec.delta;
  rec.bound_k = rec.prefactor_k * rec.delta;
  rec.bound_w = rec.prefactor_w * rec.delta;

  // Rate: the second chaos dominates when present; otherwise the slowest
  // component rate (smallest power of l, then largest power of log l).
  if (std::find(active.begin(), active.end(), 2) != active.end()) {
    rec.rate = rate_theoretical(ell, 2, d);
    rec.rate_order = 2;
  } else {
    bool first = true;
    for (int q : active) {
      Rate r = rate_theoretical(ell, q, d);
      bool slower = first || r.exponent < rec.rate.exponent ||
                    (r.exponent == rec.rate.exponent && r.log_power > rec.rate.log_power);
      if (slower) {
        rec.rate = r;
        rec.rate_order = q;
        first = false;
      }
    }
  }
  return rec;
}

McEstimate contraction_monte_carlo(int ell, int q, int r, int d, std::size_t samples, std::uint64_t seed,
                                   unsigned threads) {
  if (r < 1 || r > q - 1) throw DomainError("contraction_monte_carlo: need 1 <= r <= q-1");
  if (samples < 2) throw DomainError("contraction_monte_carlo: need at least two samples");
  specfun::SphereDim dim(d);
  specfun::GegenbauerCtx ctx(ell, dim);
  const std::size_t chunk = 1 << 14;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<double> sum(chunks, 0.0), sumsq(chunks, 0.0);
  const int D = d + 1;
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::mt19937_64 eng = stream_engine(seed, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(4 * D);
    std::size_t lo = c * chunk, hi = std::min(samples, lo + chunk);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      for (int j = 0; j < 4; ++j) {
        double n2 = 0.0;
        for (int k = 0; k < D; ++k) {
          double g = normal(eng);
          x[j * D + k] = g;
          n2 += g * g;
        }
        double inv = 1.0 / std::sqrt(n2);
        for (int k = 0; k < D; ++k) x[j * D + k] *= inv;
      }
      auto dot = [&](int a, int b) {
        double t = 0.0;
        for (int k = 0; k < D; ++k) t += x[a * D + k] * x[b * D + k];
        return std::clamp(t, -1.0, 1.0);
      };
      double g12 = ctx.eval(dot(0, 1)), g23 = ctx.eval(dot(1, 2));
      double g34 = ctx.eval(dot(2, 3)), g41 = ctx.eval(dot(3, 0));
      double v = std::pow(g12, r) * std::pow(g23, q - r) * std::pow(g34, r) * std::pow(g41, q - r);
      s += v;
      s2 += v * v;
    }
    sum[c] = s;
    sumsq[c] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sum[c];
    s2 += sumsq[c];
  }
  const double n = static_cast<double>(samples);
  double mean = s / n;
  double var = (s2 / n - mean * mean) * n / (n - 1.0);
  double mu4 = std::pow(dim.mu_d, 4);
  McEstimate out;
  out.value = mu4 * mean;
  out.std_error = mu4 * std::sqrt(std::max(var, 0.0) / n);
  out.samples = samples;
  return out;
}

}  // namespace sphchaos::contractions
