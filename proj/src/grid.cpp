#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "sphchaos/errors.hpp"
#include "sphchaos/quadrature.hpp"
#include "sphchaos/simulate.hpp"

namespace sphchaos::simulate {
namespace {

int colatitude_nodes(int degree) { return (degree + 2) / 2; }  // ceil((D+1)/2)

std::size_t node_count(int k, int degree) {
  if (k == 1) return static_cast<std::size_t>(degree) + 1;
  std::size_t inner = node_count(k - 1, degree);
  return inner * colatitude_nodes(degree);
}

struct Raw {
  std::vector<double> coords;
  std::vector<double> weights;
};

Raw sphere_nodes(int k, int degree) {
  Raw out;
  if (k == 1) {
    const int n = degree + 1;
    for (int j = 0; j < n; ++j) {
      double phi = 2.0 * std::numbers::pi * j / n;
      out.coords.push_back(std::cos(phi));
      out.coords.push_back(std::sin(phi));
      out.weights.push_back(2.0 * std::numbers::pi / n);
    }
    return out;
  }
  Raw inner = sphere_nodes(k - 1, degree);
  const auto rule = quadrature::sphere_rule(colatitude_nodes(degree), k);
  const std::size_t m = inner.weights.size();
  out.coords.reserve(rule->nodes.size() * m * (k + 1));
  for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
    double t = rule->nodes[i];
    double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t j = 0; j < m; ++j) {
      out.coords.push_back(t);
      for (int c = 0; c < k; ++c) out.coords.push_back(s * inner.coords[j * k + c]);
      out.weights.push_back(rule->weights[i] * inner.weights[j]);
    }
  }
  return out;
}

void verify(const SphereGrid& g) {
  double total = 0.0;
  for (double w : g.weights) total += w;
  if (std::abs(total - g.dim.mu_d) > 1e-12 * g.dim.mu_d)
    throw std::logic_error("build_grid: weights do not sum to the sphere measure");
  // Zonal harmonics about a generic pole must integrate to zero.
  const int D = g.exact_degree;
  const int dp1 = g.dim.d + 1;
  std::vector<double> pole(dp1);
  double nrm = 0.0;
  for (int c = 0; c < dp1; ++c) {
    pole[c] = 1.0 + 0.37 * c;
    nrm += pole[c] * pole[c];
  }
  for (double& p : pole) p /= std::sqrt(nrm);
  specfun::GegenbauerCtx ctx(D, g.dim);
  std::vector<double> acc(D + 1, 0.0), seq(D + 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double* x = g.node(i);
    double t = 0.0;
    for (int c = 0; c < dp1; ++c) t += x[c] * pole[c];
    ctx.sequence(std::clamp(t, -1.0, 1.0), seq.data());
    for (int k = 1; k <= D; ++k) acc[k] += g.weights[i] * seq[k];
  }
  for (int k = 1; k <= D; ++k)
    if (std::abs(acc[k]) > 1e-11)
      throw std::logic_error("build_grid: degree " + std::to_string(k) + " zonal integral is " +
                             std::to_string(acc[k]));
}

}  // namespace

std::string SphereGrid::descriptor() const {
  std::string s = "S^" + std::to_string(dim.d) + " product grid, exact degree " + std::to_string(exact_degree) +
                  ", " + std::to_string(size()) + " nodes";
  if (dim.d == 2) s += " (" + std::to_string(rings) + " Gauss-Legendre rings x " + std::to_string(azimuths) + " azimuths)";
  return s;
}

std::shared_ptr<const SphereGrid> build_grid(int d, int target_degree, std::size_t node_budget) {
  if (target_degree < 1) throw DomainError("build_grid: need target_degree >= 1");
  specfun::SphereDim dim(d);
  std::size_t count = node_count(d, target_degree);
  if (count > node_budget)
    throw BudgetExceeded("build_grid: " + std::to_string(count) + " nodes exceed the budget of " +
                         std::to_string(node_budget));
  static std::map<std::pair<int, int>, std::shared_ptr<const SphereGrid>> memo;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find({d, target_degree});
    if (it != memo.end()) return it->second;
  }
  auto g = std::make_shared<SphereGrid>();
  g->dim = dim;
  g->exact_degree = target_degree;
  Raw raw = sphere_nodes(d, target_degree);
  g->coords = std::move(raw.coords);
  g->weights = std::move(raw.weights);
  if (d == 2) {
    const auto rule = quadrature::sphere_rule(colatitude_nodes(target_degree), 2);
    g->rings = static_cast<int>(rule->nodes.size());
    g->azimuths = target_degree + 1;
    g->ring_t = rule->nodes;
  }
  verify(*g);
  std::lock_guard<std::mutex> lock(mu);
  return memo.emplace(std::make_pair(d, target_degree), std::shared_ptr<const SphereGrid>(g)).first->second;
}

}  // namespace sphchaos::simulate
