#include "sphchaos/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <utility>

#include "sphchaos/errors.hpp"

namespace sphchaos::quadrature {
namespace {

// Three-term recurrence of the orthonormal family:
// t p_k = b[k+1] p_{k+1} + a[k] p_k + b[k] p_{k-1}, p_0 = 1/sqrt(mu0).
struct Recurrence {
  std::vector<double> a;  // size n
  std::vector<double> b;  // size n+1, b[0] unused
  double mu0;
};

// Implicit QL on the tridiagonal matrix, carrying only the first row of the
// eigenvector matrix (that is all the weights need).
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw std::runtime_error("tridiagonal_ql: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          double zf = z[i + 1];
          z[i + 1] = s * z[i] + c * zf;
          z[i] = c * z[i] - s * zf;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// p_n and its derivative at x, plus sum_{k<n} p_k^2 for the Christoffel weight.
void evaluate(const Recurrence& rc, int n, double x, double& pn, double& dpn, double& sumsq) {
  double p0 = 0.0, p1 = 1.0 / std::sqrt(rc.mu0);
  double d0 = 0.0, d1 = 0.0;
  sumsq = p1 * p1;
  for (int k = 0; k < n; ++k) {
    double bk = k > 0 ? rc.b[k] : 0.0;
    double p2 = ((x - rc.a[k]) * p1 - bk * p0) / rc.b[k + 1];
    double d2 = ((x - rc.a[k]) * d1 + p1 - bk * d0) / rc.b[k + 1];
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
    if (k + 1 < n) sumsq += p1 * p1;
  }
  pn = p1;
  dpn = d1;
}

QuadRule golub_welsch(const Recurrence& rc, int n) {
  std::vector<double> d(rc.a.begin(), rc.a.begin() + n);
  std::vector<double> e(n, 0.0);
  for (int k = 0; k + 1 < n; ++k) e[k] = rc.b[k + 1];
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;
  tridiagonal_ql(d, e, z);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });

  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = d[order[i]];
    double pn, dpn, sumsq;
    for (int it = 0; it < 3; ++it) {
      evaluate(rc, n, x, pn, dpn, sumsq);
      if (dpn == 0.0) break;
      double step = pn / dpn;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    evaluate(rc, n, x, pn, dpn, sumsq);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / sumsq;
  }
  return rule;
}

Recurrence jacobi_recurrence(int n, double alpha, double beta) {
  Recurrence rc;
  rc.a.resize(n + 1);
  rc.b.assign(n + 2, 0.0);
  const double ab = alpha + beta;
  for (int k = 0; k <= n; ++k) {
    double s = 2.0 * k + ab;
    if (k == 0) {
      rc.a[k] = (beta - alpha) / (ab + 2.0);
    } else {
      rc.a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k <= n + 1; ++k) {
    double s = 2.0 * k + ab;
    if (k == 1) {
      // The general form is 0/0 at alpha + beta = -1; cancel (k + ab) by hand.
      rc.b[k] = std::sqrt(4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)));
      continue;
    }
    double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    double den = s * s * (s + 1.0) * (s - 1.0);
    rc.b[k] = std::sqrt(num / den);
  }
  rc.mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                    std::lgamma(ab + 2.0));
  return rc;
}

}  // namespace

QuadRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw DomainError("gauss_jacobi: need n >= 1");
  if (!(alpha > -1.0 && beta > -1.0)) throw DomainError("gauss_jacobi: need alpha, beta > -1");
  return golub_welsch(jacobi_recurrence(n, alpha, beta), n);
}

QuadRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

QuadRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: need n >= 1");
  Recurrence rc;
  rc.a.assign(n + 1, 0.0);
  rc.b.resize(n + 2);
  for (int k = 0; k <= n + 1; ++k) rc.b[k] = std::sqrt(static_cast<double>(k));
  rc.mu0 = std::sqrt(2.0 * std::numbers::pi);
  return golub_welsch(rc, n);
}

namespace {

template <class Key, class Make>
std::shared_ptr<const QuadRule> cached(std::map<Key, std::shared_ptr<const QuadRule>>& cache, std::mutex& mu,
                                       const Key& key, Make make) {
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const QuadRule>(make());
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, rule).first->second;
}

}  // namespace

std::shared_ptr<const QuadRule> sphere_rule(int n, int d) {
  static std::map<std::pair<int, int>, std::shared_ptr<const QuadRule>> cache;
  static std::mutex mu;
  double a = 0.5 * d - 1.0;
  return cached(cache, mu, std::make_pair(n, d), [&] { return gauss_jacobi(n, a, a); });
}

std::shared_ptr<const QuadRule> legendre_rule(int n) {
  static std::map<int, std::shared_ptr<const QuadRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [&] { return gauss_legendre(n); });
}

}  // namespace sphchaos::quadrature
