#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sphchaos/specfun.hpp"

namespace sphchaos::simulate {

constexpr std::size_t kDefaultNodeBudget = 2000000;
constexpr std::size_t kDenseNodeCap = 8192;
constexpr int kDenseMaxEll = 16;
constexpr int kMaxPolynomialDegree = 16;

// Product quadrature on S^d: Gauss-Jacobi in t = cos(theta) (weight
// (1-t^2)^{d/2-1}) times a grid on S^{d-1}, recursively, with a uniform
// rule on the circle at the bottom. A node is (t, sqrt(1-t^2) y).
struct SphereGrid {
  specfun::SphereDim dim{2};
  int exact_degree = 0;
  std::vector<double> coords;   // size() * (d+1), node-major
  std::vector<double> weights;
  // For d = 2 the nodes are ring-major: node = ring * azimuths + j with
  // t = ring_t[ring] and phi = 2 pi j / azimuths.
  int rings = 0;
  int azimuths = 0;
  std::vector<double> ring_t;

  std::size_t size() const { return weights.size(); }
  const double* node(std::size_t i) const { return coords.data() + i * (dim.d + 1); }
  std::string descriptor() const;
};

// Throws BudgetExceeded when the grid would exceed node_budget nodes. The
// weight sum and the vanishing of int G_k(x . p) dx for 1 <= k <= degree are
// verified on construction. Memoized per (d, degree).
std::shared_ptr<const SphereGrid> build_grid(int d, int target_degree, std::size_t node_budget = kDefaultNodeBudget);

struct FieldRealization {
  std::shared_ptr<const SphereGrid> grid;
  int ell = 0;
  std::vector<double> values;
  std::uint64_t master_seed = 0;
  std::uint64_t replica = 0;
  std::vector<double> coefficients;  // d = 2: a_{l,0}, then (cos, sin) pairs for m = 1..l
};

// Draws isotropic Gaussian fields with covariance G_{l;d}(x . y) on a fixed
// grid. For d = 2: harmonic synthesis from i.i.d. N(0, 4 pi / (2l+1))
// coefficients on real spherical harmonics. For d >= 3: a factor of the
// covariance matrix, from a symmetric eigendecomposition compressed onto its
// range (which has dimension n_{l;d}). Immutable after construction.
class FieldSampler {
 public:
  FieldSampler(std::shared_ptr<const SphereGrid> grid, int ell);

  FieldRealization sample(std::uint64_t master_seed, std::uint64_t replica) const;
  const SphereGrid& grid() const { return *grid_; }
  int ell() const { return ell_; }
  // Factor residual max |C - F F^T| (d >= 3 only, 0 otherwise).
  double factor_residual() const { return residual_; }
  std::size_t rank() const { return rank_; }

  // d = 2: real spherical harmonic Y_{l,m} at grid node i, m = -l..l.
  double harmonic(int m, std::size_t node) const;

 private:
  std::shared_ptr<const SphereGrid> grid_;
  int ell_;
  double residual_ = 0.0;
  std::size_t rank_ = 0;
  std::vector<double> legendre_;  // rings x (l+1), normalized P_l^m(t)
  std::vector<double> cos_, sin_;  // azimuths x (l+1)
  std::vector<double> factor_;     // dense path: size() x rank, row-major
};

FieldRealization sample_field(int d, int ell, std::shared_ptr<const SphereGrid> grid, std::uint64_t seed,
                              std::uint64_t replica = 0);

// d = 2: coefficients <T, Y_{l,m}> by grid quadrature, ordered as in
// FieldRealization::coefficients.
std::vector<double> analyze_coefficients(const FieldSampler& sampler, const FieldRealization& field);

// Normalized associated Legendre values P~_l^m(t) for m = 0..l, scaled so
// that the real harmonics built from them are orthonormal on S^2.
// Uses an exponent-tracking recurrence so tiny values near the poles
// underflow to zero only when they are negligible.
void normalized_legendre(int ell, double t, double* out);

enum class FunctionalKind { h, Z, S };

struct FunctionalSample {
  FunctionalKind kind = FunctionalKind::h;
  int q = 0;
  double z = 0.0;
  double raw = 0.0;
  double mean = 0.0;                  // exact expectation
  std::optional<double> normalized;   // (raw - mean) / sqrt(variance)
  double variance = 0.0;              // the variance used for normalization
  bool approximate = false;           // polynomial degree beyond grid exactness
};

// sum_i w_i H_q(T(x_i)). q = 0 returns mu_d; q = 0, 1 are not normalized.
// Throws ZeroVariance for odd l and odd q >= 3.
FunctionalSample functional_h(const FieldRealization& field, int q);

// Exact integer matrix m[q][k] with t^q = sum_k m[q][k] H_k(t), q <= Q <= 16.
std::vector<std::vector<std::int64_t>> monomial_to_hermite(int Q);

// Hermite coefficients beta_k of sum_q b[q] t^q.
std::vector<double> hermite_coefficients(const std::vector<double>& b);

// sum_q b[q] int T^q dx via the Hermite re-expansion.
FunctionalSample functional_Z(const FieldRealization& field, const std::vector<double>& b);

enum class Side { below, above };  // 1{T <= z} or 1{T > z}

// Variance of the excursion measure from the Hermite expansion truncated at
// qmax: sum_{q=2}^{qmax} J_q^2 / (q!)^2 Var[h_{l;q,d}].
double excursion_variance(int ell, int d, double z, int qmax = 8, Side side = Side::below);

// sum_i w_i 1{T(x_i) <= z} (or > z), centered by mu_d Phi(z) and normalized
// by excursion_variance.
FunctionalSample functional_excursion(const FieldRealization& field, double z, Side side = Side::below);

// Square-integrable transformation of a standard Gaussian variable.
struct MDescriptor {
  enum class Type { indicator_below, indicator_above, function } type = Type::indicator_below;
  double z = 0.0;
  std::function<double(double)> f;
  std::vector<double> breakpoints;  // discontinuities of f, if any

  static MDescriptor below(double z);
  static MDescriptor above(double z);
  static MDescriptor function(std::function<double(double)> f, std::vector<double> breakpoints = {});
};

// J_q(M) = E[M(Z) H_q(Z)].
double hermite_projection(const MDescriptor& m, int q);

}  // namespace sphchaos::simulate
