// Acceptance gate: one line per criterion, tolerances fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sphchaos/clt.hpp"
#include "sphchaos/contractions.hpp"
#include "sphchaos/moments.hpp"
#include "sphchaos/simulate.hpp"
#include "sphchaos/specfun.hpp"
#include "sphchaos/stats.hpp"

#ifndef SPHCHAOS_CLI_PATH
#define SPHCHAOS_CLI_PATH "sphchaos"
#endif

using namespace sphchaos;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const unsigned kThreads = std::max(1u, std::thread::hardware_concurrency());

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. int G^2 sin^{d-1} = mu_d / (mu_{d-1} n), d = 2..5, l = 1..64; < 10 s.
Outcome second_moment() {
  auto t0 = clk::now();
  double worst = 0.0;
  for (int d = 2; d <= 5; ++d) {
    specfun::SphereDim s(d);
    for (int ell = 1; ell <= 64; ++ell) {
      double ref = s.mu_d / (s.mu_dm1 * specfun::dim_harmonics_real(ell, s));
      double v = moments::gegenbauer_moment(ell, 2, d, moments::Range::full).value;
      worst = std::max(worst, std::abs(v / ref - 1.0));
    }
  }
  double secs = std::chrono::duration<double>(clk::now() - t0).count();
  return {worst <= 1e-10 && secs < 10.0, "max rel dev " + fmt("%.2e", worst) + ", " + fmt("%.2f s", secs)};
}

// 2. Var[h_{2;2,2}] = 32 pi^2 / 5.
Outcome variance_closed() {
  double v = moments::variance_h(2, 2, 2);
  double ref = 32.0 * std::numbers::pi * std::numbers::pi / 5.0;
  double dev = std::abs(v / ref - 1.0);
  return {dev <= 1e-10, "rel dev " + fmt("%.2e", dev)};
}

// 3. l^d moment / c within 5% at l = 2048 (d = 2) or 512, approached
// monotonically along dyadic l; < 3 min.
Outcome asymptotics() {
  auto t0 = clk::now();
  const std::pair<int, int> pairs[] = {{2, 3}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {4, 3}, {3, 3}};
  bool ok = true;
  std::string detail;
  for (auto [d, q] : pairs) {
    int top = d == 2 ? 2048 : 512;
    std::vector<int> ells;
    for (int l = 32; l <= top; l *= 2) ells.push_back(l);
    auto rows = moments::asymptotic_ratio(q, d, ells, kThreads);
    bool mono = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      mono = mono && std::abs(rows[i].ratio - 1.0) <= std::abs(rows[i - 1].ratio - 1.0);
    double last = rows.back().ratio;
    bool in = last >= 0.95 && last <= 1.05;
    ok = ok && in && mono;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s(%d,%d) %.4f%s", detail.empty() ? "" : "; ", d, q, last, mono ? "" : " non-monotone");
    detail += buf;
  }
  double secs = std::chrono::duration<double>(clk::now() - t0).count();
  ok = ok && secs < 180.0;
  return {ok, detail + "; " + fmt("%.1f s", secs)};
}

// 4. slope of Var[h_{l;4,2}] l^2 against log l over 2^8..2^13 within 10% of 576; < 2 min.
Outcome log_divergence() {
  auto t0 = clk::now();
  auto ld = moments::log_divergence_check({256, 512, 1024, 2048, 4096, 8192}, kThreads);
  double secs = std::chrono::duration<double>(clk::now() - t0).count();
  double rel = std::abs(ld.fit.slope / 576.0 - 1.0);
  return {rel <= 0.10 && secs < 120.0, "slope " + fmt("%.2f", ld.fit.slope) + " +- " + fmt("%.2f", ld.fit.slope_stderr) +
                                           ", " + fmt("%.1f s", secs)};
}

// 5. K(2;1) = mu^4 / n^3 for l <= 64, d <= 5; K(q;r) == K(q;q-r).
Outcome contraction_closed() {
  double worst = 0.0;
  for (int d = 2; d <= 5; ++d) {
    specfun::SphereDim s(d);
    for (int ell = 1; ell <= 64; ++ell) {
      double n = specfun::dim_harmonics_real(ell, s);
      worst = std::max(worst, std::abs(contractions::kernel_contraction(ell, 2, 1, d) * n * n * n / std::pow(s.mu_d, 4) - 1.0));
    }
  }
  bool sym = true;
  for (int d = 2; d <= 5; ++d)
    for (int ell : {2, 7, 16, 33})
      for (int q = 3; q <= 8; ++q) {
        auto t = contractions::contraction_table(ell, q, d);
        for (int r = 1; r < q; ++r) sym = sym && t.K(r) == t.K(q - r);
      }
  return {worst <= 1e-10 && sym, "max rel dev " + fmt("%.2e", worst) + (sym ? ", symmetry exact" : ", symmetry broken")};
}

// 6. spectral K vs 10^6-quadruple Monte Carlo within 3 stderr, d = 2, l = 4, q = 3, 4; < 2 min.
Outcome monte_carlo() {
  auto t0 = clk::now();
  bool ok = true;
  double worst = 0.0;
  for (int q : {3, 4})
    for (int r = 1; r < q; ++r) {
      auto mc = contractions::contraction_monte_carlo(4, q, r, 2, 1000000, 0xACCE97 + 10 * q + r, kThreads);
      double z = (mc.value - contractions::kernel_contraction(4, q, r, 2)) / mc.std_error;
      worst = std::max(worst, std::abs(z));
      ok = ok && std::abs(z) <= 3.0;
    }
  double secs = std::chrono::duration<double>(clk::now() - t0).count();
  return {ok && secs < 120.0, "max |z| " + fmt("%.2f", worst) + ", " + fmt("%.1f s", secs)};
}

// 7. K(q;1) l^{9/2} shows no increase over the top three dyadic l <= 256, d = 2, q = 5, 7.
Outcome decay_bound() {
  bool ok = true;
  std::string detail;
  for (int q : {5, 7}) {
    double v64 = contractions::kernel_contraction(64, q, 1, 2) * std::pow(64.0, 4.5);
    double v128 = contractions::kernel_contraction(128, q, 1, 2) * std::pow(128.0, 4.5);
    double v256 = contractions::kernel_contraction(256, q, 1, 2) * std::pow(256.0, 4.5);
    ok = ok && v128 <= v64 && v256 <= v128;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%sq=%d: %.1f %.1f %.1f", detail.empty() ? "" : "; ", q, v64, v128, v256);
    detail += buf;
  }
  return {ok, detail};
}

// 8. cross term exactly 0 for q2 = q1 + 1; otherwise positive with
// cross / (Var^2 l^{-(d-1)}) stable: spread over the top three dyadic l
// within 10%, or non-increasing.
Outcome cross_terms() {
  bool zero = true;
  for (int d = 2; d <= 4; ++d)
    for (int ell : {4, 8, 16, 64})
      for (int q1 = 2; q1 <= 5; ++q1) zero = zero && contractions::cross_contraction(ell, q1, q1 + 1, d) == 0.0;
  bool bounded = true;
  std::string detail;
  for (int d : {2, 3})
    for (auto [q1, q2] : {std::pair{2, 4}, std::pair{2, 5}, std::pair{3, 5}, std::pair{3, 6}, std::pair{4, 6}}) {
      std::vector<double> c;
      for (int ell : {64, 128, 256}) {
        double v = moments::variance_h(ell, q1, d, kThreads);
        double x = contractions::cross_contraction(ell, q1, q2, d);
        bounded = bounded && x > 0.0;
        c.push_back(x / (v * v) * std::pow(ell, d - 1));
      }
      double hi = *std::max_element(c.begin(), c.end()), lo = *std::min_element(c.begin(), c.end());
      bool stable = hi / lo <= 1.10 || (c[1] <= c[0] && c[2] <= c[1]);
      bounded = bounded && stable;
      if (d == 2 && q1 == 2 && q2 == 4) detail = "C(2,4;d=2) " + fmt("%.3f", c.back());
    }
  return {zero && bounded, std::string(zero ? "adjacent orders vanish" : "adjacent orders nonzero") + ", " + detail};
}

// 9. h_3 on S^2, l = 16, 64, 128, 2000 replicas: d_K strictly decreasing,
// below bound + 3 floor, final < 0.05; < 5 min.
Outcome clt_sweep() {
  auto t0 = clk::now();
  clt::SweepSpec s;
  s.kind = simulate::FunctionalKind::h;
  s.d = 2;
  s.q = 3;
  s.ells = {16, 64, 128};
  s.replicas = 2000;
  s.seed = 7;
  s.threads = kThreads;
  auto rep = clt::clt_sweep(s);
  bool ok = true;
  std::string detail = "d_K";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    ok = ok && r.empirical_dK <= r.explicit_bound + 3.0 * r.mc_stderr_scale;
    if (i) ok = ok && r.empirical_dK < rep.rows[i - 1].empirical_dK;
    detail += " " + fmt("%.4f", r.empirical_dK);
  }
  ok = ok && rep.rows.back().empirical_dK < 0.05;
  double secs = std::chrono::duration<double>(clk::now() - t0).count();
  ok = ok && secs < 300.0;
  return {ok, detail + ", bounds " + fmt("%.3f", rep.rows[0].explicit_bound) + ".." +
                  fmt("%.3f", rep.rows.back().explicit_bound) + ", " + fmt("%.1f s", secs)};
}

// 10. S_l(1) on S^2, l = 16, 64, 2000 replicas: mean within 4 stderr of
// 4 pi Phi(1), variance within 4 stderr of the truncated expansion, d_K at
// 64 below 0.05 and below its l = 16 value; < 5 min.
Outcome excursion() {
  auto t0 = clk::now();
  clt::SweepSpec s;
  s.kind = simulate::FunctionalKind::S;
  s.d = 2;
  s.z = 1.0;
  s.ells = {16, 64};
  s.replicas = 2000;
  s.seed = 7;
  s.threads = kThreads;
  auto rep = clt::clt_sweep(s);
  bool ok = true;
  std::string detail;
  const double mean_ref = 4.0 * std::numbers::pi * stats::normal_cdf(1.0);
  for (const auto& r : rep.rows) {
    double zm = (r.sample_mean - mean_ref) / r.sample_mean_stderr;
    double zv = (r.sample_var - r.theory_var) / r.sample_var_stderr;
    ok = ok && std::abs(zm) <= 4.0 && std::abs(zv) <= 4.0;
    // The expansion with a single factorial in the denominator, for comparison only.
    double single = 0.0;
    for (int q = 2; q <= 8; ++q) {
      double J = simulate::hermite_projection(simulate::MDescriptor::below(1.0), q);
      single += J * J / std::tgamma(q + 1.0) * moments::variance_h(r.ell, q, 2);
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%sl=%d z_mean %.2f z_var %.2f (var %.4g pred %.4g, single-factorial form %.4g) d_K %.4f",
                  detail.empty() ? "" : "; ", r.ell, zm, zv, r.sample_var, r.theory_var, single, r.empirical_dK);
    detail += buf;
  }
  ok = ok && rep.rows[1].empirical_dK < 0.05 && rep.rows[1].empirical_dK < rep.rows[0].empirical_dK;
  double secs = std::chrono::duration<double>(clk::now() - t0).count();
  ok = ok && secs < 300.0;
  return {ok, detail + "; " + fmt("%.1f s", secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 11. CLI runs with the same seed and different --threads write identical files.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sphchaos_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> cmds = {
      "clt --kind h --d 2 --q 3 --ell 16,32,64 --reps 300 --seed 7",
      "excursion --d 2 --z 1.0 --ell 16,32 --reps 300 --seed 7",
      "clt --kind Z --d 2 --betas 0,0,0.5,1 --ell 8,16,32 --reps 200 --seed 11",
      "simulate --kind h --d 3 --q 2 --ell 4,6 --reps 50 --seed 5",
      "contractions --d 2 --q 4 --ell 4,8 --mc-samples 50000 --seed 3",
      "moments --d 3 --q 5 --ell 16..256"};
  std::size_t files = 0;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    std::vector<fs::path> dirs;
    for (int t : {1, 2, 5}) {
      fs::path dir = root / (std::to_string(i) + "_t" + std::to_string(t));
      std::string line = std::string("\"") + SPHCHAOS_CLI_PATH + "\" " + cmds[i] + " --threads " + std::to_string(t) +
                         " --out \"" + dir.string() + "\" > /dev/null 2>&1";
      int rc = std::system(line.c_str());
      if (rc == -1 || !fs::exists(dir)) return {false, "could not run: " + cmds[i]};
      dirs.push_back(dir);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++files;
      std::string ref = slurp(e.path());
      for (std::size_t k = 1; k < dirs.size(); ++k)
        if (!fs::exists(dirs[k] / e.path().filename()) || slurp(dirs[k] / e.path().filename()) != ref)
          return {false, "differs: " + cmds[i] + " -> " + e.path().filename().string()};
    }
  }
  fs::remove_all(root);
  return {files > 0, std::to_string(files) + " files identical across --threads 1, 2, 5"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"second-moment identity", second_moment},
      {"variance closed form", variance_closed},
      {"moment asymptotics", asymptotics},
      {"log divergence d=2 q=4", log_divergence},
      {"contraction closed form and symmetry", contraction_closed},
      {"spectral vs Monte Carlo contractions", monte_carlo},
      {"contraction decay bound", decay_bound},
      {"cross-term cancellation", cross_terms},
      {"CLT sweep h_3 on S^2", clt_sweep},
      {"excursion CLT", excursion},
      {"CLI determinism across threads", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] criterion %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
