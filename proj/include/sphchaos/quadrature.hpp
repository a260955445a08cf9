#pragma once

#include <memory>
#include <vector>

namespace sphchaos::quadrature {

struct QuadRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;
};

// n-point Gauss-Jacobi rule for (1-t)^alpha (1+t)^beta on [-1, 1], exact for
// polynomials of degree 2n-1. Nodes and weights come from the symmetric
// Jacobi matrix (Golub-Welsch) and are then polished by Newton steps on the
// orthonormal recurrence, with weights from the Christoffel function.
QuadRule gauss_jacobi(int n, double alpha, double beta);

QuadRule gauss_legendre(int n);

// The rule with weight (1-t^2)^{d/2-1}, i.e. the colatitude measure of S^d
// after t = cos(theta). Cached per (n, d); the returned rule is immutable.
std::shared_ptr<const QuadRule> sphere_rule(int n, int d);

// Cached Gauss-Legendre rule on [-1, 1].
std::shared_ptr<const QuadRule> legendre_rule(int n);

// Gauss-Hermite rule for the weight exp(-t^2/2) (probabilists' Hermite).
QuadRule gauss_hermite(int n);

}  // namespace sphchaos::quadrature
