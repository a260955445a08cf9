#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <string>

#include "sphchaos/errors.hpp"
#include "sphchaos/moments.hpp"
#include "sphchaos/quadrature.hpp"
#include "sphchaos/simulate.hpp"
#include "sphchaos/stats.hpp"

namespace sphchaos::simulate {
namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

void normalize(FunctionalSample& s) {
  if (s.variance > 0.0) s.normalized = (s.raw - s.mean) / std::sqrt(s.variance);
}

}  // namespace

FunctionalSample functional_h(const FieldRealization& field, int q) {
  if (q < 0) throw DomainError("functional_h: need q >= 0");
  const SphereGrid& g = *field.grid;
  FunctionalSample s;
  s.kind = FunctionalKind::h;
  s.q = q;
  s.approximate = static_cast<long>(q) * field.ell > g.exact_degree;
  if (q == 0) {
    s.raw = s.mean = g.dim.mu_d;
    return s;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights[i] * specfun::hermite(q, field.values[i]);
  s.raw = acc;
  if (q == 1) return s;
  s.variance = moments::variance_h(field.ell, q, g.dim.d);
  if (s.variance <= 0.0) throw ZeroVariance("functional_h: h vanishes identically (odd l, odd q)");
  normalize(s);
  return s;
}

std::vector<std::vector<std::int64_t>> monomial_to_hermite(int Q) {
  if (Q < 0 || Q > kMaxPolynomialDegree)
    throw DomainError("monomial_to_hermite: degree must be in [0, " + std::to_string(kMaxPolynomialDegree) + "]");
  // t^q = sum_j q! / (2^j j! (q-2j)!) H_{q-2j}(t)
  std::vector<std::vector<std::int64_t>> m(Q + 1, std::vector<std::int64_t>(Q + 1, 0));
  for (int q = 0; q <= Q; ++q) {
    for (int j = 0; 2 * j <= q; ++j) {
      // q! / ((q-2j)! j! 2^j), accumulated exactly
      std::int64_t c = 1;
      for (int k = q - 2 * j + 1; k <= q; ++k) c *= k;
      std::int64_t den = 1;
      for (int k = 1; k <= j; ++k) den *= 2 * k;
      m[q][q - 2 * j] = c / den;
    }
  }
  return m;
}

std::vector<double> hermite_coefficients(const std::vector<double>& b) {
  if (b.empty()) throw DomainError("hermite_coefficients: empty coefficient list");
  const int Q = static_cast<int>(b.size()) - 1;
  auto m = monomial_to_hermite(Q);
  std::vector<double> beta(Q + 1, 0.0);
  for (int q = 0; q <= Q; ++q)
    for (int k = 0; k <= q; ++k) beta[k] += b[q] * static_cast<double>(m[q][k]);
  return beta;
}

FunctionalSample functional_Z(const FieldRealization& field, const std::vector<double>& b) {
  const SphereGrid& g = *field.grid;
  std::vector<double> beta = hermite_coefficients(b);
  const int Q = static_cast<int>(beta.size()) - 1;
  FunctionalSample s;
  s.kind = FunctionalKind::Z;
  s.q = Q;
  s.approximate = static_cast<long>(Q) * field.ell > g.exact_degree;
  std::vector<double> h(Q + 1, 0.0), H(Q + 1);
  h[0] = g.dim.mu_d;
  for (std::size_t i = 0; i < g.size(); ++i) {
    specfun::hermite_sequence(Q, field.values[i], H.data());
    for (int k = 1; k <= Q; ++k) h[k] += g.weights[i] * H[k];
  }
  for (int k = 0; k <= Q; ++k) s.raw += beta[k] * h[k];
  s.mean = beta[0] * g.dim.mu_d;
  for (int k = 2; k <= Q; ++k)
    if (beta[k] != 0.0) s.variance += beta[k] * beta[k] * moments::variance_h(field.ell, k, g.dim.d);
  if (Q >= 2 && s.variance <= 0.0) throw ZeroVariance("functional_Z: polynomial has no chaos component of order >= 2");
  normalize(s);
  return s;
}

MDescriptor MDescriptor::below(double z) { return MDescriptor{Type::indicator_below, z, {}, {}}; }
MDescriptor MDescriptor::above(double z) { return MDescriptor{Type::indicator_above, z, {}, {}}; }
MDescriptor MDescriptor::function(std::function<double(double)> f, std::vector<double> breakpoints) {
  return MDescriptor{Type::function, 0.0, std::move(f), std::move(breakpoints)};
}

namespace {

constexpr double kCut = 40.0;  // phi(40) ~ 1e-348: the rest of the line is invisible in double

// int_a^b f(t) phi(t) dt by composite Gauss-Legendre panels of width <= 1/2.
template <class F>
double gaussian_integral(F f, double a, double b) {
  a = std::max(a, -kCut);
  b = std::min(b, kCut);
  if (!(b > a)) return 0.0;
  const auto rule = quadrature::legendre_rule(20);
  int panels = static_cast<int>(std::ceil((b - a) / 0.5));
  double h = (b - a) / panels, total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double mid = a + (p + 0.5) * h, s = 0.0;
    for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
      double t = mid + 0.5 * h * rule->nodes[i];
      s += rule->weights[i] * f(t) * stats::normal_pdf(t);
    }
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace

double hermite_projection(const MDescriptor& m, int q) {
  if (q < 0) throw DomainError("hermite_projection: need q >= 0");
  auto Hq = [q](double t) { return specfun::hermite(q, t); };
  switch (m.type) {
    case MDescriptor::Type::indicator_below:
      return gaussian_integral(Hq, -kCut, m.z);
    case MDescriptor::Type::indicator_above:
      return gaussian_integral(Hq, m.z, kCut);
    case MDescriptor::Type::function:
      break;
  }
  if (!m.f) throw DomainError("hermite_projection: empty function descriptor");
  double value = 0.0, second = 0.0;
  if (m.breakpoints.empty()) {
    static const quadrature::QuadRule gh = quadrature::gauss_hermite(120);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      double fx = m.f(gh.nodes[i]);
      value += gh.weights[i] * fx * Hq(gh.nodes[i]);
      second += gh.weights[i] * fx * fx;
    }
    value *= norm;
    second *= norm;
  } else {
    std::vector<double> cuts{-kCut};
    for (double b : m.breakpoints) cuts.push_back(b);
    cuts.push_back(kCut);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      value += gaussian_integral([&](double t) { return m.f(t) * Hq(t); }, cuts[i], cuts[i + 1]);
      second += gaussian_integral([&](double t) { double v = m.f(t); return v * v; }, cuts[i], cuts[i + 1]);
    }
  }
  if (!std::isfinite(value) || !std::isfinite(second))
    throw DomainError("hermite_projection: M is not square integrable against the Gaussian");
  return value;
}

double excursion_variance(int ell, int d, double z, int qmax, Side side) {
  MDescriptor m = side == Side::below ? MDescriptor::below(z) : MDescriptor::above(z);
  double v = 0.0;
  for (int q = 2; q <= qmax; ++q) {
    double var = moments::variance_h(ell, q, d);
    if (var == 0.0) continue;
    double J = hermite_projection(m, q);
    double f = factorial(q);
    v += J * J / (f * f) * var;
  }
  return v;
}

FunctionalSample functional_excursion(const FieldRealization& field, double z, Side side) {
  const SphereGrid& g = *field.grid;
  FunctionalSample s;
  s.kind = FunctionalKind::S;
  s.z = z;
  s.approximate = true;  // indicator integrand: quadrature is never exact
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool in = side == Side::below ? field.values[i] <= z : field.values[i] > z;
    if (in) acc += g.weights[i];
  }
  s.raw = acc;
  double p = stats::normal_cdf(z);
  s.mean = g.dim.mu_d * (side == Side::below ? p : 1.0 - p);
  if (std::isfinite(z)) s.variance = excursion_variance(field.ell, g.dim.d, z, 8, side);
  normalize(s);
  return s;
}

}  // namespace sphchaos::simulate
