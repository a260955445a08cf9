#include <cmath>
#include <numbers>
#include <vector>

#include "sphchaos/errors.hpp"
#include "sphchaos/specfun.hpp"

namespace sphchaos::specfun {
namespace {

constexpr double kSwitch = 12.0;

// Power series, accumulated in long double; fine for x < 12 and the small
// orders used here (cancellation costs about four digits at the switch).
double series(double nu, double x) {
  long double h = 0.5L * x;
  long double term = std::exp(static_cast<long double>(nu) * std::log(h) - std::lgamma(static_cast<long double>(nu) + 1.0L));
  long double sum = term;
  long double h2 = h * h;
  for (int k = 1; k < 200; ++k) {
    term *= -h2 / (k * (k + static_cast<long double>(nu)));
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum) && k > h) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion truncated at its smallest term; *err gets that term's size.
double hankel(double nu, double x, double* err = nullptr) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    double next = term * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(last) && k > 1) break;
    last = next;
    term = next;
    // term_k carries i^k-pattern signs: k=1 -> Q, k=2 -> -P, k=3 -> -Q, ...
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
    }
    if (std::abs(term) < 1e-17) break;
  }
  double w = x - (0.5 * nu + 0.25) * std::numbers::pi;
  double r = std::sqrt(2.0 / (std::numbers::pi * x));
  if (err) *err = r * std::abs(last);
  return r * (p * std::cos(w) - q * std::sin(w));
}

// Downward recurrence from a high order; `order` is reached at index n
// where values[j] approximates J_{start+j}. Returns the unnormalized ladder.
std::vector<double> miller(double first, int steps, double x, int extra) {
  int top = steps + extra;
  std::vector<double> v(top + 2, 0.0);
  v[top + 1] = 0.0;
  v[top] = 1e-300;
  for (int j = top; j >= 1; --j) {
    double nu = first + j;
    v[j - 1] = 2.0 * nu / x * v[j] - v[j + 1];
    if (std::abs(v[j - 1]) > 1e250) {
      for (int i = j - 1; i <= top + 1; ++i) v[i] *= 1e-250;
    }
  }
  return v;
}

int miller_extra(int n, double x) {
  return 20 + static_cast<int>(std::sqrt(40.0 * (n + 1))) + static_cast<int>(x);
}

double integer_order(int n, double x) {
  if (x < kSwitch) return series(n, x);
  if (n <= 3) {
    // Just above the switch the truncated expansion can still miss 1e-12
    // for n >= 2; the long double series is good to x ~ 20 there.
    double err;
    double h = hankel(n, x, &err);
    if (err > 1e-13 && x < 20.0) return series(n, x);
    return h;
  }
  if (x < 16.0) return series(n, x);
  if (x > n) {
    double j0 = hankel(0, x), j1 = hankel(1, x);
    for (int k = 1; k < n; ++k) {
      double j2 = 2.0 * k / x * j1 - j0;
      j0 = j1;
      j1 = j2;
    }
    return j1;
  }
  // Normalize the ladder with J_0 + 2 sum J_{2k} = 1.
  std::vector<double> v = miller(0.0, n, x, miller_extra(n, x));
  double norm = v[0];
  for (std::size_t j = 2; j < v.size(); j += 2) norm += 2.0 * v[j];
  return v[n] / norm;
}

double half_order(int twice, double x) {
  // order = twice/2 with twice odd, twice >= -1
  if (x < kSwitch) return series(0.5 * twice, x);
  const double r = std::sqrt(2.0 / (std::numbers::pi * x));
  double jm = r * std::cos(x);  // J_{-1/2}
  double jp = r * std::sin(x);  // J_{1/2}
  if (twice == -1) return jm;
  if (twice == 1) return jp;
  int steps = (twice - 1) / 2;  // from 1/2 up to the target
  double order = 0.5 * twice;
  if (x > order) {
    for (int k = 0; k < steps; ++k) {
      double nu = 0.5 + k;
      double next = 2.0 * nu / x * jp - jm;
      jm = jp;
      jp = next;
    }
    return jp;
  }
  std::vector<double> v = miller(-0.5, steps + 1, x, miller_extra(steps + 1, x));
  // v[0] ~ J_{-1/2}, v[1] ~ J_{1/2}; normalize against the larger one.
  double scale = std::abs(r * std::cos(x)) > std::abs(r * std::sin(x)) ? r * std::cos(x) / v[0]
                                                                        : r * std::sin(x) / v[1];
  return v[steps + 1] * scale;
}

}  // namespace

double bessel_j(double nu, double x) {
  double twice = 2.0 * nu;
  if (nu < -0.5 || twice != std::floor(twice))
    throw UnsupportedOrder("bessel_j: order must be an integer or half-integer >= -1/2");
  if (!(x >= 0.0)) throw DomainError("bessel_j: negative argument");
  int n2 = static_cast<int>(twice);
  if (x == 0.0) return n2 == 0 ? 1.0 : 0.0;
  if (n2 % 2 == 0) return integer_order(n2 / 2, x);
  return half_order(n2, x);
}

std::vector<double> bessel_j_zeros(double nu, int count) {
  std::vector<double> zeros;
  zeros.reserve(count);
  const double mu = 4.0 * nu * nu;
  double prev = std::max(nu, 0.0);
  auto f = [&](double x) { return bessel_j(nu, x); };
  for (int s = 1; s <= count; ++s) {
    // McMahon's expansion as the starting guess.
    double beta = (s + 0.5 * nu - 0.25) * std::numbers::pi;
    double e = 8.0 * beta;
    double x = beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      double j = f(x);
      double dj = nu / x * j - bessel_j(nu + 1.0, x);
      double step = j / dj;
      x -= step;
      if (std::abs(step) < 1e-15 * x) {
        ok = true;
        break;
      }
    }
    if (!ok || !(x > prev + 1.0) || std::abs(f(x)) > 1e-12) {
      // Fallback: scan for the next sign change after prev, then bisect.
      double a = prev + 1e-3, fa = f(a), b = a;
      while (true) {
        b = a + 0.05;
        double fb = f(b);
        if (fa * fb <= 0.0) break;
        a = b;
        fa = fb;
      }
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        double m = 0.5 * (a + b), fm = f(m);
        if (fa * fm <= 0.0) {
          b = m;
        } else {
          a = m;
          fa = fm;
        }
      }
      x = 0.5 * (a + b);
    }
    zeros.push_back(x);
    prev = x;
  }
  return zeros;
}

}  // namespace sphchaos::specfun
