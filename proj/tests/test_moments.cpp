#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sphchaos/contractions.hpp"
#include "sphchaos/errors.hpp"
#include "sphchaos/moments.hpp"
#include "sphchaos/specfun.hpp"

using namespace sphchaos;
using namespace sphchaos::moments;
using specfun::SphereDim;

namespace {

double moment2_closed(int ell, int d) {
  SphereDim s(d);
  return s.mu_d / (s.mu_dm1 * specfun::dim_harmonics_real(ell, s));
}

// Frozen values of the Bessel-integral constants, computed once in extended
// precision from the defining integral (zero-to-zero partial sums with
// series acceleration); the d = 3 odd cases have closed forms.
struct Frozen {
  int q, d;
  double c;
};
const Frozen kFrozen[] = {
    {3, 2, 0.3675525969478614}, {5, 2, 0.3299338010600641}, {6, 2, 0.3368279617664489},
    {7, 2, 0.2608495301688063}, {8, 2, 0.2377146534191921}, {3, 3, std::numbers::pi / 4},
    {4, 3, std::numbers::pi / 4}, {5, 3, 5 * std::numbers::pi / 32}, {6, 3, std::numbers::pi / 8},
    {3, 4, 2.205315581687168},  {4, 4, 1.621138938277404},  {5, 4, 1.036731939784353},
    {3, 5, 7.952156404399164},  {4, 5, 4.847028665538538},  {3, 6, 35.28504930699469},
};

}  // namespace

TEST_CASE("second moment identity") {
  for (int d = 2; d <= 5; ++d)
    for (int ell = 1; ell <= 64; ell += 3) {
      auto m = gegenbauer_moment(ell, 2, d, Range::full);
      CHECK(std::abs(m.value / moment2_closed(ell, d) - 1.0) < 1e-10);
    }
  CHECK(gegenbauer_moment(7, 2, 3, Range::full).value == doctest::Approx(moment2_closed(7, 3)).epsilon(1e-12));
}

TEST_CASE("moment examples and parity") {
  CHECK(std::abs(gegenbauer_moment(3, 3, 2, Range::full).value) < 1e-13);
  CHECK(gegenbauer_moment(1, 3, 2, Range::half).value == doctest::Approx(0.25).epsilon(1e-13));
  for (int d = 2; d <= 4; ++d)
    for (int ell = 1; ell <= 12; ++ell)
      for (int q = 1; q <= 6; ++q) {
        auto full = gegenbauer_moment(ell, q, d, Range::full);
        auto half = gegenbauer_moment(ell, q, d, Range::half);
        CHECK(full.err_est >= 0.0);
        if ((ell * q) % 2 == 0)
          CHECK(std::abs(full.value - 2.0 * half.value) <= 1e-12 * std::max(1.0, std::abs(full.value)));
        else
          CHECK(std::abs(full.value) < 1e-13);
      }
  CHECK_THROWS_AS(gegenbauer_moment(0, 2, 2, Range::full), DomainError);
  CHECK_THROWS_AS(gegenbauer_moment(3, 0, 2, Range::full), DomainError);
}

TEST_CASE("moment stays within its error estimate under a tighter tolerance") {
  for (int ell : {50, 300}) {
    MomentOptions loose;
    loose.abs_tol = loose.rel_tol = 1e-9;
    auto a = gegenbauer_moment(ell, 5, 2, Range::half, loose);
    auto b = gegenbauer_moment(ell, 5, 2, Range::half);
    CHECK(std::abs(a.value - b.value) <= std::max(a.err_est, 1e-15 * std::abs(b.value)) + 1e-16);
  }
}

TEST_CASE("worker count does not change moments") {
  MomentOptions one, four;
  four.threads = 4;
  for (int ell : {33, 512}) {
    auto a = gegenbauer_moment(ell, 6, 3, Range::half, one);
    auto b = gegenbauer_moment(ell, 6, 3, Range::half, four);
    CHECK(a.value == b.value);
    CHECK(a.err_est == b.err_est);
  }
}

TEST_CASE("variance examples") {
  CHECK(variance_h(2, 2, 2) == doctest::Approx(32 * std::numbers::pi * std::numbers::pi / 5).epsilon(1e-12));
  CHECK(variance_h(4, 1, 5) == 0.0);
  CHECK(variance_h(4, 0, 5) == 0.0);
  CHECK(variance_h(5, 3, 2) == 0.0);
}

TEST_CASE("variance agrees with the spectral b_0 coefficient") {
  for (int d = 2; d <= 4; ++d) {
    SphereDim s(d);
    for (int ell = 2; ell <= 32; ell += 5)
      for (int q = 2; q <= 6; ++q) {
        double b0 = contractions::expansion(ell, q, d)->coeffs[0];
        double spectral = std::tgamma(q + 1.0) * s.mu_d * s.mu_d * b0;
        double v = variance_h(ell, q, d);
        if (v == 0.0)
          CHECK(std::abs(spectral) < 1e-12);
        else
          CHECK(std::abs(spectral / v - 1.0) < 1e-9);
      }
  }
}

TEST_CASE("bessel constants") {
  for (const auto& f : kFrozen) {
    auto bc = bessel_constant(f.q, f.d);
    INFO("q=" << f.q << " d=" << f.d);
    double tol = bc.convergence_mode == Convergence::conditional ? 1e-6 : 1e-8;
    CHECK(std::abs(bc.c_qd - f.c) < tol);
    CHECK(bc.zeros_used > 0);
  }
  CHECK(bessel_constant(3, 3).convergence_mode == Convergence::conditional);
  CHECK(bessel_constant(3, 2).convergence_mode == Convergence::conditional);
  CHECK(bessel_constant(5, 2).convergence_mode == Convergence::absolute);
  CHECK(bessel_constant(4, 3).convergence_mode == Convergence::absolute);
  CHECK(bessel_constant(2, 2).c_qd == doctest::Approx(0.5).epsilon(1e-14));
  for (int d = 2; d <= 5; ++d) {
    SphereDim s(d);
    CHECK(bessel_constant(2, d).c_qd == doctest::Approx(std::tgamma(d) * s.mu_d / (4 * s.mu_dm1)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(bessel_constant(4, 2), DivergentIntegral);
  CHECK_THROWS_AS(bessel_constant(1, 3), DomainError);
}

TEST_CASE("odd d = 3 constant matches the scaled moment limit") {
  // l^3 moment(l, 3, 3, half) = (pi/4) (l/(l+1))^3 exactly for d = 3.
  for (int ell : {64, 256, 1024}) {
    double m = gegenbauer_moment(ell, 3, 3, Range::half).value * std::pow(ell, 3);
    double ratio = m / bessel_constant(3, 3).c_qd;
    CHECK(ratio == doctest::Approx(std::pow(ell / (ell + 1.0), 3)).epsilon(1e-9));
  }
}

TEST_CASE("asymptotic ratio") {
  auto rows = asymptotic_ratio(6, 2, {1024});
  CHECK(std::abs(rows[0].ratio - 1.0) < 0.05);
  CHECK_THROWS_AS(asymptotic_ratio(2, 3, {64}), RateMismatch);
  auto r5 = asymptotic_ratio(5, 3, {32, 64, 128, 256});
  for (std::size_t i = 1; i < r5.size(); ++i)
    CHECK(std::abs(r5[i].ratio - 1.0) <= std::abs(r5[i - 1].ratio - 1.0));
}

TEST_CASE("log divergence preconditions") {
  CHECK_THROWS_AS(log_divergence_check({256, 512, 1024}), DomainError);
  CHECK_THROWS_AS(log_divergence_check({1024, 4096}), DomainError);
  CHECK_THROWS_AS(log_divergence_check({1024, 2048, 4096, 3}), DomainError);
}
