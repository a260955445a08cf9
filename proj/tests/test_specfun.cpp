#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sphchaos/errors.hpp"
#include "sphchaos/specfun.hpp"

using namespace sphchaos;
using namespace sphchaos::specfun;

namespace {

// Unnormalized Jacobi P_n^{(a,a)} from the textbook three-term recurrence,
// divided by P_n^{(a,a)}(1) = binom(n+a, n).
double jacobi_normalized(int n, double a, double t) {
  double p0 = 1.0, p1 = (a + 1.0) * t;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    double kk = k + 1;
    double c1 = 2.0 * kk * (kk + 2.0 * a) * (2.0 * kk + 2.0 * a - 2.0);
    double c3 = (2.0 * kk + 2.0 * a - 1.0) * (2.0 * kk + 2.0 * a) * (2.0 * kk + 2.0 * a - 2.0);
    double c4 = 2.0 * (kk + a - 1.0) * (kk + a - 1.0) * (2.0 * kk + 2.0 * a);
    double p2 = (c3 * t * p1 - c4 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1 / std::exp(std::lgamma(n + a + 1.0) - std::lgamma(n + 1.0) - std::lgamma(a + 1.0));
}

}  // namespace

TEST_CASE("sphere measures") {
  SphereDim s2(2);
  CHECK(s2.mu_d == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
  CHECK(s2.mu_dm1 == doctest::Approx(2 * std::numbers::pi).epsilon(1e-14));
  SphereDim s3(3);
  CHECK(s3.mu_d == doctest::Approx(2 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
  CHECK(SphereDim(4).mu_d == doctest::Approx(8.0 / 3.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
  CHECK_THROWS_AS(SphereDim(1), DomainError);
}

TEST_CASE("harmonic space dimensions") {
  CHECK(dim_harmonics(5, SphereDim(2)) == 11);
  CHECK(dim_harmonics(2, SphereDim(3)) == 9);
  CHECK(dim_harmonics(1, SphereDim(4)) == 5);
  for (int ell = 1; ell < 40; ++ell) CHECK(dim_harmonics(ell, SphereDim(3)) == std::uint64_t((ell + 1) * (ell + 1)));
  CHECK_THROWS_AS(dim_harmonics(0, SphereDim(2)), DomainError);
  CHECK_THROWS_AS(dim_harmonics(1 << 20, SphereDim(40)), OverflowError);
  CHECK(dim_harmonics_real(0, SphereDim(3)) == 1.0);
}

TEST_CASE("gegenbauer normalization, parity, examples") {
  CHECK(gegenbauer(2, 2, 0.0) == doctest::Approx(-0.5).epsilon(1e-15));
  for (int d = 2; d <= 6; ++d)
    for (int ell = 0; ell <= 256; ell += 7) {
      GegenbauerCtx ctx(ell, SphereDim(d));
      CHECK(std::abs(gegenbauer(ctx, 1.0) - 1.0) < 1e-13);
      for (double t : {0.13, 0.5, 0.91}) {
        double sgn = ell % 2 ? -1.0 : 1.0;
        CHECK(std::abs(gegenbauer(ctx, -t) - sgn * gegenbauer(ctx, t)) < 1e-13);
      }
    }
  CHECK(gegenbauer(3, 4, 0.3) == doctest::Approx(jacobi_normalized(3, 1.0, 0.3)).epsilon(1e-14));
  for (int d = 3; d <= 6; ++d)
    for (int ell : {1, 4, 9, 20})
      for (double t : {-0.7, 0.05, 0.42, 0.99})
        CHECK(std::abs(gegenbauer(ell, d, t) - jacobi_normalized(ell, 0.5 * d - 1.0, t)) < 1e-12);
  CHECK_THROWS_AS(gegenbauer(3, 2, 1.0 + 1e-9), DomainError);
  CHECK_NOTHROW(gegenbauer(3, 2, 1.0 + 1e-13));
}

TEST_CASE("d = 2 agrees with the standard Legendre polynomial") {
  for (int ell = 0; ell <= 120; ell += 5)
    for (double t = -1.0; t <= 1.0; t += 0.0625) CHECK(std::abs(gegenbauer(ell, 2, t) - std::legendre(ell, t)) < 1e-13);
}

TEST_CASE("d = 3 closed form sin((l+1) theta) / ((l+1) sin theta)") {
  for (int ell : {1, 6, 50, 300})
    for (double th : {0.2, 1.0, 2.5}) {
      double ref = std::sin((ell + 1) * th) / ((ell + 1) * std::sin(th));
      CHECK(std::abs(gegenbauer(ell, 3, std::cos(th)) - ref) < 1e-12);
    }
}

TEST_CASE("hermite") {
  CHECK(hermite(2, 0.0) == -1.0);
  CHECK(hermite(3, 2.0) == 2.0);
  CHECK(hermite(4, 1.0) == -2.0);
  double seq[9];
  hermite_sequence(8, 0.7, seq);
  for (int q = 0; q <= 8; ++q) CHECK(seq[q] == hermite(q, 0.7));
  CHECK_THROWS_AS(hermite(-1, 0.0), DomainError);
}

TEST_CASE("bessel values against the standard library") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(std::abs(bessel_j(0.5, std::numbers::pi)) < 1e-15);
  CHECK(std::abs(bessel_j(0, 2.404825557695773)) < 1e-10);
  double worst = 0.0;
  for (double nu : {-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.5, 7.0})
    for (double x = 0.01; x < 2000.0; x *= 1.013)
      worst = std::max(worst, std::abs(bessel_j(nu, x) - (nu < 0 ? std::sqrt(2 / (std::numbers::pi * x)) * std::cos(x)
                                                                   : std::cyl_bessel_j(nu, x))));
  CHECK(worst < 1e-12);
  for (double x : {1e3, 1e4, 9.9e4}) CHECK(std::abs(bessel_j(0, x) - std::cyl_bessel_j(0.0, x)) < 1e-12);
  CHECK_THROWS_AS(bessel_j(0.3, 1.0), UnsupportedOrder);
  CHECK_THROWS_AS(bessel_j(1.0, -1.0), DomainError);
}

TEST_CASE("bessel zeros") {
  auto z0 = bessel_j_zeros(0.0, 40);
  CHECK(z0[0] == doctest::Approx(2.404825557695773).epsilon(1e-14));
  for (double nu : {0.0, 0.5, 1.0, 1.5}) {
    auto z = bessel_j_zeros(nu, 200);
    for (std::size_t i = 0; i < z.size(); ++i) {
      CHECK(std::abs(bessel_j(nu, z[i])) < 1e-9);
      if (i) CHECK(z[i] > z[i - 1] + 3.0);
    }
  }
  auto zh = bessel_j_zeros(0.5, 5);
  for (int s = 0; s < 5; ++s) CHECK(zh[s] == doctest::Approx((s + 1) * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("hilb leading term") {
  HilbApprox h2(100, SphereDim(2));
  double th = 0.3;
  double bound = 2.0 * std::sqrt(th) * std::pow(100.0, -1.5);
  CHECK(std::abs(hilb_leading(h2, th) - gegenbauer(100, 2, std::cos(th))) <= bound);
  CHECK(std::abs(hilb_leading(h2, th) - gegenbauer(100, 2, std::cos(th))) <= h2.remainder_bound(th));
  HilbApprox h3(200, SphereDim(3));
  double exact = gegenbauer(200, 3, std::cos(0.5));
  CHECK(std::abs(hilb_leading(h3, 0.5) / exact - 1.0) < 0.01);
  // a_{l,d} approaches 1 monotonically along dyadic multipoles.
  for (int d : {2, 4, 5}) {
    double prev = 1e9;
    for (int ell = 8; ell <= 8192; ell *= 2) {
      double gap = std::abs(HilbApprox(ell, SphereDim(d)).a_ld - 1.0);
      CHECK(gap <= prev);
      prev = gap;
    }
    CHECK(prev < 1e-3);
  }
  for (int ell : {10, 80, 640})
    for (double t : {0.05, 0.4, 1.2, 1.5}) {
      HilbApprox h(ell, SphereDim(4));
      CHECK(std::abs(hilb_leading(h, t) - gegenbauer(ell, 4, std::cos(t))) <= h.remainder_bound(t));
    }
  CHECK_THROWS_AS(hilb_leading(h2, 0.0), DomainError);
  CHECK_THROWS_AS(hilb_leading(h2, 2.0), DomainError);
}
