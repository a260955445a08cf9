#include "sphchaos/clt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sphchaos/contractions.hpp"
#include "sphchaos/errors.hpp"
#include "sphchaos/parallel.hpp"
#include "sphchaos/rng.hpp"
#include "sphchaos/stats.hpp"

namespace sphchaos::clt {

double kolmogorov_distance(std::vector<double> x) {
  if (x.size() < 2) throw InsufficientData("kolmogorov_distance: need two or more samples");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double F = stats::normal_cdf(x[i]);
    worst = std::max({worst, (i + 1) / n - F, F - i / n});
  }
  return worst;
}

double wasserstein_distance(std::vector<double> x) {
  if (x.size() < 2) throw InsufficientData("wasserstein_distance: need two or more samples");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - stats::normal_quantile((i + 0.5) / n));
  return s / n;
}

double mc_floor(std::size_t n) { return 0.5 / std::sqrt(static_cast<double>(n)); }

std::uint64_t row_seed(std::uint64_t seed, int ell) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ell) * 0xD1B54A32D192ED03ull));
}

namespace {

bool excluded_pair(int d, int q) {
  return (d == 3 && q == 3) || (d == 3 && q == 4) || (d == 4 && q == 3) || (d == 5 && q == 3);
}

}  // namespace

int grid_degree(const SweepSpec& spec, int ell) {
  int factor = 2;
  switch (spec.kind) {
    case simulate::FunctionalKind::h: factor = spec.q; break;
    case simulate::FunctionalKind::Z: factor = static_cast<int>(spec.betas.size()) - 1; break;
    case simulate::FunctionalKind::S: factor = spec.excursion_degree_factor; break;
  }
  return std::max(2, factor) * ell;
}

simulate::FunctionalSample evaluate(const SweepSpec& spec, const simulate::FieldRealization& f) {
  switch (spec.kind) {
    case simulate::FunctionalKind::h: return simulate::functional_h(f, spec.q);
    case simulate::FunctionalKind::Z: return simulate::functional_Z(f, spec.betas);
    default: return simulate::functional_excursion(f, spec.z, spec.side);
  }
}

Report clt_sweep(const SweepSpec& spec) {
  if (spec.ells.empty()) throw DomainError("clt_sweep: empty multipole list");
  if (spec.replicas < 200) throw DomainError("clt_sweep: need at least 200 replicas per row");
  if (spec.kind == simulate::FunctionalKind::h && spec.q < 2) throw DomainError("clt_sweep: need q >= 2");
  if (spec.kind == simulate::FunctionalKind::Z && spec.betas.size() < 3)
    throw DomainError("clt_sweep: polynomial needs degree >= 2");
  Report rep;
  rep.kind = spec.kind;
  rep.d = spec.d;
  rep.q = spec.q;
  rep.betas = spec.betas;
  rep.z = spec.z;
  std::vector<int> ells = spec.ells;
  std::sort(ells.begin(), ells.end());
  ells.erase(std::unique(ells.begin(), ells.end()), ells.end());
  for (int ell : ells) {
    if (ell < 2) throw DomainError("clt_sweep: need ell >= 2");
    if (ell % 2 == 1 && !spec.allow_odd)
      throw DomainError("clt_sweep: odd multipole " + std::to_string(ell) + " needs the allow-odd option");
  }
  if (spec.kind == simulate::FunctionalKind::h && excluded_pair(spec.d, spec.q))
    rep.warnings.push_back("CLT not guaranteed: (d,q)=(" + std::to_string(spec.d) + "," + std::to_string(spec.q) +
                           ") is outside the range covered by the rate theorem");

  std::vector<double> beta;
  if (spec.kind == simulate::FunctionalKind::Z) beta = simulate::hermite_coefficients(spec.betas);

  for (int ell : ells) {
    SweepRow row;
    row.ell = ell;
    row.replicas = spec.replicas;
    row.mc_stderr_scale = mc_floor(spec.replicas);
    row.grid_degree = grid_degree(spec, ell);
    auto grid = simulate::build_grid(spec.d, row.grid_degree, spec.node_budget);
    simulate::FieldSampler sampler(grid, ell);
    const std::uint64_t master = row_seed(spec.seed, ell);

    std::vector<double> raw(spec.replicas), normalized(spec.replicas);
    std::vector<char> approx(spec.replicas, 0);
    parallel_for(spec.replicas, spec.threads, [&](std::size_t r) {
      auto f = sampler.sample(master, r);
      auto s = evaluate(spec, f);
      raw[r] = s.raw;
      normalized[r] = s.normalized.value_or(std::numeric_limits<double>::quiet_NaN());
      approx[r] = s.approximate ? 1 : 0;
    });
    {
      auto f = sampler.sample(master, 0);
      auto s = evaluate(spec, f);
      row.theory_mean = s.mean;
      row.theory_var = s.variance;
      row.approximate = spec.kind != simulate::FunctionalKind::S && s.approximate;
    }
    if (!(row.theory_var > 0.0)) throw ZeroVariance("clt_sweep: functional has zero variance");

    const double n = static_cast<double>(spec.replicas);
    double m = 0.0;
    for (double v : raw) m += v;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : raw) {
      double c = (v - m) * (v - m);
      m2 += c;
      m4 += c * c;
    }
    row.sample_mean = m;
    row.sample_var = m2 / (n - 1.0);
    row.sample_mean_stderr = std::sqrt(row.sample_var / n);
    double mu4 = m4 / n, s2 = m2 / n;
    row.sample_var_stderr = std::sqrt(std::max(0.0, mu4 - s2 * s2) / n);
    row.empirical_dK = kolmogorov_distance(normalized);
    row.empirical_dW = wasserstein_distance(normalized);

    row.grid_refinement = std::numeric_limits<double>::quiet_NaN();
    if (spec.kind == simulate::FunctionalKind::S && spec.d == 2) {
      // Same coefficients, finer grid: the change estimates the indicator's
      // quadrature error.
      auto fine = simulate::build_grid(2, 2 * row.grid_degree, spec.node_budget);
      simulate::FieldSampler fine_sampler(fine, ell);
      const std::size_t probe = std::min<std::size_t>(50, spec.replicas);
      std::vector<double> diff(probe);
      parallel_for(probe, spec.threads, [&](std::size_t r) {
        auto f = fine_sampler.sample(master, r);
        diff[r] = std::abs(evaluate(spec, f).raw - raw[r]);
      });
      double s = 0.0;
      for (double v : diff) s += v;
      row.grid_refinement = s / probe;
    }

    switch (spec.kind) {
      case simulate::FunctionalKind::h: {
        auto rate = contractions::rate_theoretical(ell, spec.q, spec.d);
        row.theoretical_rate = rate.value;
        rep.rate_label = rate.label;
        row.explicit_bound = contractions::berry_esseen_bound(ell, spec.q, spec.d).bound_k;
        break;
      }
      case simulate::FunctionalKind::Z: {
        auto pb = contractions::poly_bound(ell, spec.d, beta);
        row.theoretical_rate = pb.rate.value;
        rep.rate_label = pb.rate.label;
        row.explicit_bound = pb.bound_k;
        break;
      }
      case simulate::FunctionalKind::S:
        row.theoretical_rate = 1.0 / std::sqrt(static_cast<double>(ell));
        rep.rate_label = "l^(-1/2)";
        row.explicit_bound = std::numeric_limits<double>::quiet_NaN();
        break;
    }
    if (spec.keep_samples) {
      row.raw = std::move(raw);
      row.normalized = std::move(normalized);
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

RateFit fit_rate(const std::vector<int>& ells, const std::vector<double>& values, const std::vector<double>& theory,
                 std::size_t replicas) {
  if (ells.size() != values.size() || ells.size() != theory.size())
    throw DomainError("fit_rate: column lengths differ");
  RateFit fit;
  const double floor = replicas > 0 ? 3.0 * mc_floor(replicas) : 0.0;
  std::vector<double> x, y, yt;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    bool low = !(values[i] >= floor) || !(values[i] > 0.0);
    fit.below_floor.push_back(low);
    if (low) continue;
    x.push_back(std::log(static_cast<double>(ells[i])));
    y.push_back(std::log(values[i]));
    yt.push_back(std::log(theory[i]));
  }
  fit.rows_used = x.size();
  if (x.size() < 2) return fit;
  auto f = stats::fit_line(x, y);
  auto ft = stats::fit_line(x, yt);
  fit.fitted = true;
  fit.slope = f.slope;
  fit.slope_stderr = f.slope_stderr;
  fit.theoretical_slope = ft.slope;
  double se = std::isnan(f.slope_stderr) ? 0.0 : f.slope_stderr;
  fit.consistent = fit.slope <= fit.theoretical_slope + 2.0 * se;
  return fit;
}

RateFit rate_fit(const Report& report) {
  if (report.rows.size() < 3) throw InsufficientData("rate_fit: need at least three rows");
  std::vector<int> ells;
  std::vector<double> dk, th;
  for (const auto& r : report.rows) {
    ells.push_back(r.ell);
    dk.push_back(r.empirical_dK);
    th.push_back(r.theoretical_rate);
  }
  return fit_rate(ells, dk, th, report.rows.front().replicas);
}

}  // namespace sphchaos::clt
