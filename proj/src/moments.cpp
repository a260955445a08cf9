#include "sphchaos/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "sphchaos/errors.hpp"
#include "sphchaos/parallel.hpp"
#include "sphchaos/quadrature.hpp"
#include "sphchaos/specfun.hpp"

namespace sphchaos::moments {
namespace {

double ipow(double x, int q) {
  double r = 1.0;
  for (int i = 0; i < q; ++i) r *= x;
  return r;
}

double panel_sum(const specfun::GegenbauerCtx& ctx, int q, double upper, int panels, int nodes, unsigned threads) {
  const auto rule = quadrature::legendre_rule(nodes);
  const int dm1 = ctx.dim().d - 1;
  const double h = upper / panels;
  std::vector<double> part(panels);
  parallel_for(panels, threads, [&](std::size_t p) {
    const double mid = (p + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < nodes; ++i) {
      double th = mid + 0.5 * h * rule->nodes[i];
      double g = ctx.eval(std::cos(th));
      s += rule->weights[i] * ipow(g, q) * ipow(std::sin(th), dm1);
    }
    part[p] = 0.5 * h * s;
  });
  double total = 0.0;
  for (double v : part) total += v;
  return total;
}

}  // namespace

MomentResult gegenbauer_moment(int ell, int q, int d, Range range, const MomentOptions& opt) {
  if (ell < 1) throw DomainError("gegenbauer_moment: need ell >= 1");
  if (q < 1) throw DomainError("gegenbauer_moment: need q >= 1");
  specfun::GegenbauerCtx ctx(ell, specfun::SphereDim(d));
  const double upper = range == Range::full ? std::numbers::pi : 0.5 * std::numbers::pi;
  const double width = std::numbers::pi / (2.0 * (ell + 1));
  int panels = static_cast<int>(std::ceil(upper / width - 1e-9));
  const int nodes = std::min(10 + 2 * q, 64);

  double coarse = panel_sum(ctx, q, upper, panels, nodes, opt.threads);
  double fine = coarse, err = 0.0;
  for (int round = 0; round < 3; ++round) {
    panels *= 2;
    fine = panel_sum(ctx, q, upper, panels, nodes, opt.threads);
    err = std::abs(fine - coarse);
    if (err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(fine))) return {fine, err, panels};
    coarse = fine;
  }
  throw ToleranceError("gegenbauer_moment: tolerance not met for ell=" + std::to_string(ell) +
                           " q=" + std::to_string(q) + " d=" + std::to_string(d),
                       fine, err);
}

double variance_h(int ell, int q, int d, unsigned threads) {
  if (ell < 1) throw DomainError("variance_h: need ell >= 1");
  if (q < 0) throw DomainError("variance_h: need q >= 0");
  specfun::SphereDim dim(d);
  if (q <= 1) return 0.0;
  if (q == 2) return 2.0 * dim.mu_d * dim.mu_d / specfun::dim_harmonics_real(ell, dim);
  if (ell % 2 == 1 && q % 2 == 1) return 0.0;

  static std::map<std::tuple<int, int, int>, double> memo;
  static std::mutex mu;
  const auto key = std::make_tuple(ell, q, d);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  MomentOptions opt;
  opt.threads = threads;
  double half = gegenbauer_moment(ell, q, d, Range::half, opt).value;
  double v = std::tgamma(q + 1.0) * dim.mu_d * dim.mu_dm1 * 2.0 * half;
  std::lock_guard<std::mutex> lock(mu);
  memo.emplace(key, v);
  return v;
}

std::vector<RatioRow> asymptotic_ratio(int q, int d, const std::vector<int>& ells, unsigned threads) {
  if (q == 2)
    throw RateMismatch("asymptotic_ratio: the q = 2 moment decays like l^{-(d-1)}, not l^{-d}");
  BesselConstant c = bessel_constant(q, d);
  if (std::abs(c.c_qd) < 1e-14) throw DomainError("asymptotic_ratio: c_{q;d} is zero");
  std::vector<RatioRow> rows;
  MomentOptions opt;
  opt.threads = threads;
  for (int ell : ells) {
    MomentResult m = gegenbauer_moment(ell, q, d, Range::half, opt);
    rows.push_back({ell, m.value, m.err_est, std::pow(static_cast<double>(ell), d) * m.value / c.c_qd});
  }
  return rows;
}

LogDivergence log_divergence_check(const std::vector<int>& ells, unsigned threads) {
  if (ells.size() < 3) throw DomainError("log_divergence_check: need at least three multipoles");
  for (std::size_t i = 0; i < ells.size(); ++i) {
    int e = ells[i];
    if (e < 1 || (e & (e - 1)) != 0) throw DomainError("log_divergence_check: multipoles must be powers of two");
    if (i > 0 && e != 2 * ells[i - 1]) throw DomainError("log_divergence_check: list must be consecutive dyadic");
  }
  if (ells.back() < 4096) throw DomainError("log_divergence_check: largest multipole must be >= 2^12");
  LogDivergence out;
  out.ells = ells;
  std::vector<double> x;
  for (int e : ells) {
    double v = variance_h(e, 4, 2, threads);
    out.scaled.push_back(v * static_cast<double>(e) * e);
    x.push_back(std::log(static_cast<double>(e)));
  }
  out.fit = stats::fit_line(x, out.scaled);
  return out;
}

}  // namespace sphchaos::moments
