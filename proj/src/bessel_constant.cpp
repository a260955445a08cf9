#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "sphchaos/errors.hpp"
#include "sphchaos/moments.hpp"
#include "sphchaos/quadrature.hpp"
#include "sphchaos/specfun.hpp"

namespace sphchaos::moments {
namespace {

constexpr int kNodes = 20;

struct Integrand {
  double nu;
  int q;
  double power;   // -q nu + d - 1
  double scale;   // (2^nu Gamma(nu+1))^q
  double operator()(double psi) const {
    double j = specfun::bessel_j(nu, psi);
    double r = scale;
    for (int i = 0; i < q; ++i) r *= j;
    return r * std::pow(psi, power);
  }
};

// Interval integrals over [0, z_1], [z_1, z_2], ...
std::vector<double> interval_integrals(const Integrand& f, const std::vector<double>& zeros) {
  const auto rule = quadrature::legendre_rule(kNodes);
  std::vector<double> out(zeros.size());
  double a = 0.0;
  for (std::size_t n = 0; n < zeros.size(); ++n) {
    double b = zeros[n];
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < kNodes; ++i) s += rule->weights[i] * f(mid + half * rule->nodes[i]);
    out[n] = half * s;
    a = b;
  }
  return out;
}

// Positive tails: S(N) = c + sum_k a_k X_N^{-(gamma+k)}, X_N the N-th zero.
// Solve for c from the sums at N0 2^i, i = first..last.
double extrapolate(const std::vector<double>& sums, const std::vector<double>& cut, double gamma) {
  const int m = static_cast<int>(sums.size());
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    double u = cut[0] / cut[i];
    A(i, 0) = 1.0;
    for (int k = 1; k < m; ++k) A(i, k) = std::pow(u, gamma + k - 1);
    b(i) = sums[i];
  }
  Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  return x(0);
}

// Alternating tails: repeated averaging of consecutive partial sums.
double average(std::vector<double> s, int levels) {
  for (int k = 0; k < levels; ++k)
    for (std::size_t i = 0; i + 1 < s.size() - k; ++i) s[i] = 0.5 * (s[i] + s[i + 1]);
  return s[0];
}

BesselConstant compute(int q, int d) {
  BesselConstant out;
  out.q = q;
  out.d = d;
  specfun::SphereDim dim(d);
  if (q == 2) {
    out.c_qd = std::tgamma(static_cast<double>(d)) * dim.mu_d / (4.0 * dim.mu_dm1);
    return out;
  }
  const double nu = 0.5 * d - 1.0;
  const double p = 0.5 * (q - 2) * (d - 1);  // integrand decays like psi^{-p}
  if (p <= 1.0 && q % 2 == 0)
    throw DivergentIntegral("bessel_constant: integral diverges for d=" + std::to_string(d) +
                            ", q=" + std::to_string(q));
  out.convergence_mode = p > 1.0 ? Convergence::absolute : Convergence::conditional;
  Integrand f{nu, q, -q * nu + d - 1.0, std::pow(std::pow(2.0, nu) * std::tgamma(nu + 1.0), q)};

  if (q % 2 == 0) {
    const int n0 = 32, levels = 7;
    const int total = n0 << (levels - 1);
    std::vector<double> zeros = specfun::bessel_j_zeros(nu, total);
    std::vector<double> pieces = interval_integrals(f, zeros);
    std::vector<double> sums, cut;
    double s = 0.0;
    for (int n = 0, next = n0; n < total; ++n) {
      s += pieces[n];
      if (n + 1 == next) {
        sums.push_back(s);
        cut.push_back(zeros[n]);
        next *= 2;
      }
    }
    const double gamma = p - 1.0;
    double all = extrapolate(sums, cut, gamma);
    std::vector<double> s2(sums.begin() + 1, sums.end()), c2(cut.begin() + 1, cut.end());
    double fewer = extrapolate(s2, c2, gamma);
    out.c_qd = all;
    out.err_est = std::abs(all - fewer);
    out.zeros_used = total;
  } else {
    const int n0 = 60, levels = 24;
    const int total = n0 + levels + 1;
    std::vector<double> zeros = specfun::bessel_j_zeros(nu, total);
    std::vector<double> pieces = interval_integrals(f, zeros);
    std::vector<double> partial;
    double s = 0.0;
    for (int n = 0; n < total; ++n) {
      s += pieces[n];
      if (n + 1 >= n0) partial.push_back(s);
    }
    std::vector<double> head(partial.begin(), partial.end() - 1);
    double all = average(partial, levels + 1);
    double fewer = average(head, levels);
    out.c_qd = all;
    out.err_est = std::abs(all - fewer);
    out.zeros_used = total;
  }
  return out;
}

}  // namespace

BesselConstant bessel_constant(int q, int d) {
  if (d < 2) throw DomainError("bessel_constant: need d >= 2");
  if (q < 2) throw DomainError("bessel_constant: need q >= 2");
  static std::map<std::pair<int, int>, BesselConstant> memo;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find({q, d});
    if (it != memo.end()) return it->second;
  }
  BesselConstant c = compute(q, d);
  std::lock_guard<std::mutex> lock(mu);
  memo.emplace(std::make_pair(q, d), c);
  return c;
}

}  // namespace sphchaos::moments
