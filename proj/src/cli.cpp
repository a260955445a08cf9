#include "sphchaos/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "sphchaos/clt.hpp"
#include "sphchaos/contractions.hpp"
#include "sphchaos/errors.hpp"
#include "sphchaos/moments.hpp"
#include "sphchaos/parallel.hpp"
#include "sphchaos/report.hpp"
#include "sphchaos/rng.hpp"
#include "sphchaos/simulate.hpp"
#include "sphchaos/stats.hpp"

#ifndef SPHCHAOS_VERSION
#define SPHCHAOS_VERSION "0.0.0"
#endif

namespace sphchaos::cli {

using json = nlohmann::ordered_json;
using report::format_real;

namespace {

constexpr const char* kFormat = "sphchaos-run/1";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int to_int(const std::string& s) {
  std::string t = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw DomainError("not an integer: '" + s + "'");
  return v;
}

std::string fmt_int(long long v) { return std::to_string(v); }

json real_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<int> parse_ell_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw DomainError("empty item in multipole list '" + text + "'");
    if (auto pos = item.find(".."); pos != std::string::npos) {
      int a = to_int(item.substr(0, pos)), b = to_int(item.substr(pos + 2));
      if (a < 1 || b < a) throw DomainError("bad dyadic range '" + item + "'");
      for (long long v = a; v <= b; v *= 2) out.push_back(static_cast<int>(v));
    } else if (item.find(':') != std::string::npos) {
      auto p1 = item.find(':');
      auto p2 = item.find(':', p1 + 1);
      if (p2 == std::string::npos) throw DomainError("range '" + item + "' needs a:b:step");
      int a = to_int(item.substr(0, p1)), b = to_int(item.substr(p1 + 1, p2 - p1 - 1)),
          step = to_int(item.substr(p2 + 1));
      if (step < 1 || b < a) throw DomainError("bad range '" + item + "'");
      for (long long v = a; v <= b; v += step) out.push_back(static_cast<int>(v));
    } else {
      out.push_back(to_int(item));
    }
  }
  if (out.empty()) throw DomainError("empty multipole list");
  for (int v : out)
    if (v < 1) throw DomainError("multipoles must be positive");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(v))
      throw DomainError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty number list");
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw DomainError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw DomainError(path + ": duplicate key '" + key + "'");
    kv.emplace_back(key, value);
  }
  return kv;
}

namespace {

struct Params {
  int d = 2;
  int q = 3;
  std::string ell;
  std::size_t reps = 2000;
  std::uint64_t seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out = ".";
  std::string config;
  double tol = 1e-12;
  std::size_t max_nodes = simulate::kDefaultNodeBudget;
  bool allow_odd = false;
  std::string kind = "h";
  double z = 1.0;
  std::string betas = "0,0,0,1";
  std::string side = "below";
  int r = 0;
  std::size_t mc_samples = 0;
  int grid_factor = 4;
};

// Keys left out of the manifest echo: they may differ between runs that
// must produce identical files.
const std::set<std::string> kNotEchoed = {"threads", "out", "config", "seed"};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  Params p;
  std::vector<std::pair<std::string, std::function<json()>>> echo;
  CLI::Option* seed_opt = nullptr;
  bool uses_seed = false;

  template <class T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help) {
    auto* opt = app->add_option("--" + key, var, help)->capture_default_str();
    if (!kNotEchoed.count(key)) echo.emplace_back(key, [&var] { return json(var); });
    return opt;
  }
  void flag(const std::string& key, bool& var, const std::string& help) {
    app->add_flag("--" + key, var, help);
    echo.emplace_back(key, [&var] { return json(var); });
  }
  void common() {
    add("config", p.config, "key = value file; flags given on the command line win");
    add("out", p.out, "output directory");
    add("threads", p.threads, "worker threads (outputs do not depend on it)")->check(CLI::PositiveNumber);
  }
  void seeded() {
    seed_opt = add("seed", p.seed, "master seed (drawn from entropy and recorded when absent)");
    uses_seed = true;
  }
};

struct Context {
  std::filesystem::path dir;
  std::string name;
  json summary = json::object();
  json checks = json::array();
  json warnings = json::array();
  json outputs = json::array();
  bool passed = true;

  std::string path(const std::string& file) {
    outputs.push_back(file);
    return (dir / file).string();
  }
  void check(const std::string& what, bool ok, json detail = json::object()) {
    json c = {{"name", what}, {"pass", ok}};
    for (auto& [k, v] : detail.items()) c[k] = v;
    checks.push_back(c);
    passed = passed && ok;
  }
  void warn(const std::string& w) { warnings.push_back(w); }
};

simulate::FunctionalKind parse_kind(const std::string& k) {
  if (k == "h") return simulate::FunctionalKind::h;
  if (k == "Z" || k == "z") return simulate::FunctionalKind::Z;
  if (k == "S" || k == "s") return simulate::FunctionalKind::S;
  throw DomainError("--kind must be h, Z or S");
}

simulate::Side parse_side(const std::string& s) {
  if (s == "below") return simulate::Side::below;
  if (s == "above") return simulate::Side::above;
  throw DomainError("--side must be below or above");
}

void write_plot(Context& ctx, const std::string& file, const std::string& comment, const std::vector<int>& ells,
                const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(ells[i])));
    ly.push_back(y[i] > 0.0 ? std::log(y[i]) : kNaN);
  }
  report::write_dat(ctx.path(file), comment, lx, ly);
}

void cmd_moments(const Params& p, Context& ctx) {
  if (p.q < 2) throw DomainError("moments: --q must be >= 2");
  specfun::SphereDim dim(p.d);
  auto ells = parse_ell_list(p.ell);
  report::CsvWriter csv(ctx.path("moments.csv"), {"d", "q", "ell", "moment", "err_est", "variance", "c_qd", "ratio"});
  std::vector<double> plotted;
  if (p.q == 2) {
    double c = moments::bessel_constant(2, p.d).c_qd;
    for (int ell : ells) {
      double n = specfun::dim_harmonics_real(ell, dim);
      double half = dim.mu_d / (2.0 * dim.mu_dm1 * n);
      double var = 2.0 * dim.mu_d * dim.mu_d / n;
      csv.row({fmt_int(p.d), "2", fmt_int(ell), format_real(half), "0", format_real(var), format_real(c), ""});
      plotted.push_back(half);
    }
    ctx.summary["c_qd"] = c;
    ctx.summary["closed_form"] = true;
  } else {
    std::optional<moments::BesselConstant> bc;
    try {
      bc = moments::bessel_constant(p.q, p.d);
    } catch (const DivergentIntegral& e) {
      ctx.warn(e.what());
    }
    moments::MomentOptions opt;
    opt.threads = p.threads;
    opt.abs_tol = p.tol;
    opt.rel_tol = p.tol;
    bool tol_ok = true;
    double worst = 0.0;
    for (int ell : ells) {
      moments::MomentResult m;
      try {
        m = moments::gegenbauer_moment(ell, p.q, p.d, moments::Range::half, opt);
      } catch (const ToleranceError& e) {
        m.value = e.best_value;
        m.err_est = e.err_est;
        tol_ok = false;
      }
      double var = kNaN;
      try {
        var = moments::variance_h(ell, p.q, p.d, p.threads);
      } catch (const ToleranceError&) {
        tol_ok = false;
      }
      worst = std::max(worst, m.err_est / std::max(1e-300, std::abs(m.value)));
      double ratio = bc ? std::pow(static_cast<double>(ell), p.d) * m.value / bc->c_qd : kNaN;
      csv.row({fmt_int(p.d), fmt_int(p.q), fmt_int(ell), format_real(m.value), format_real(m.err_est),
               format_real(var), bc ? format_real(bc->c_qd) : "", format_real(ratio)});
      plotted.push_back(std::abs(m.value));
    }
    ctx.check("quadrature_tolerance", tol_ok, {{"worst_relative_err", worst}, {"tol", p.tol}});
    if (bc) {
      ctx.summary["c_qd"] = bc->c_qd;
      ctx.summary["c_qd_err_est"] = bc->err_est;
      ctx.summary["convergence"] =
          bc->convergence_mode == moments::Convergence::conditional ? "conditional" : "absolute";
    }
    if (p.d == 2 && p.q == 4) {
      try {
        auto ld = moments::log_divergence_check(ells, p.threads);
        csv.row({"2", "4", "log_slope", format_real(ld.fit.slope), format_real(ld.fit.slope_stderr), "", "", ""});
        double rel = std::abs(ld.fit.slope / 576.0 - 1.0);
        ctx.summary["log_slope"] = ld.fit.slope;
        ctx.summary["log_slope_stderr"] = ld.fit.slope_stderr;
        ctx.check("log_slope_near_576", rel <= 0.1, {{"slope", ld.fit.slope}, {"relative_dev", rel}, {"limit", 0.1}});
      } catch (const DomainError& e) {
        ctx.warn(std::string("log-slope row skipped: ") + e.what());
      }
    }
  }
  write_plot(ctx, "moments.dat", "log ell, log |moment|", ells, plotted);
}

void cmd_contractions(const Params& p, Context& ctx) {
  if (p.q < 2) throw DomainError("contractions: --q must be >= 2");
  if (p.r != 0 && (p.r < 1 || p.r > p.q - 1)) throw DomainError("contractions: --r must be in 1..q-1");
  specfun::SphereDim dim(p.d);
  auto ells = parse_ell_list(p.ell);
  report::CsvWriter csv(ctx.path("contractions.csv"),
                        {"d", "q", "r", "ell", "K", "bound_tv", "bound_k", "bound_w", "rate_theoretical"});
  std::optional<report::CsvWriter> mc;
  if (p.mc_samples > 0)
    mc.emplace(ctx.path("contractions_mc.csv"),
               std::vector<std::string>{"d", "q", "r", "ell", "K", "mc_value", "mc_stderr", "z_score"});
  bool symmetric = true, closed_ok = true, mc_ok = true;
  double closed_worst = 0.0, z_worst = 0.0;
  for (int ell : ells) {
    if (ell < 2) throw DomainError("contractions: need ell >= 2");
    auto table = contractions::contraction_table(ell, p.q, p.d);
    std::optional<contractions::BoundRecord> b;
    try {
      b = contractions::berry_esseen_bound(ell, p.q, p.d);
    } catch (const ZeroVariance&) {
      ctx.warn("ell=" + std::to_string(ell) + ": zero variance (odd ell, odd q); bounds omitted");
    }
    auto rate = contractions::rate_theoretical(ell, p.q, p.d);
    for (int r = 1; r < p.q; ++r) {
      symmetric = symmetric && table.K(r) == table.K(p.q - r);
      if (p.r != 0 && r != p.r) continue;
      csv.row({fmt_int(p.d), fmt_int(p.q), fmt_int(r), fmt_int(ell), format_real(table.K(r)),
               b ? format_real(b->bound_tv) : "", b ? format_real(b->bound_k) : "",
               b ? format_real(b->bound_w) : "", format_real(rate.value)});
      if (mc) {
        std::uint64_t s = splitmix64(p.seed ^ (static_cast<std::uint64_t>(ell) << 8 | static_cast<std::uint64_t>(r)));
        auto est = contractions::contraction_monte_carlo(ell, p.q, r, p.d, p.mc_samples, s, p.threads);
        double z = (est.value - table.K(r)) / est.std_error;
        z_worst = std::max(z_worst, std::abs(z));
        mc_ok = mc_ok && std::abs(z) <= 3.0;
        mc->row({fmt_int(p.d), fmt_int(p.q), fmt_int(r), fmt_int(ell), format_real(table.K(r)),
                 format_real(est.value), format_real(est.std_error), format_real(z)});
      }
    }
    if (p.q == 2) {
      double n = specfun::dim_harmonics_real(ell, dim);
      double dev = std::abs(table.K(1) * n * n * n / std::pow(dim.mu_d, 4) - 1.0);
      closed_worst = std::max(closed_worst, dev);
      closed_ok = closed_ok && dev <= 1e-10;
    }
  }
  ctx.summary["rate_label"] = contractions::rate_theoretical(std::max(2, ells.back()), p.q, p.d).label;
  ctx.check("symmetry_exact", symmetric);
  if (p.q == 2) ctx.check("closed_form_mu4_over_n3", closed_ok, {{"worst_relative_dev", closed_worst}, {"limit", 1e-10}});
  if (mc) ctx.check("monte_carlo_within_3_stderr", mc_ok, {{"worst_abs_z", z_worst}, {"samples", p.mc_samples}});
}

clt::SweepSpec sweep_spec(const Params& p) {
  clt::SweepSpec s;
  s.kind = parse_kind(p.kind);
  s.d = p.d;
  s.q = p.q;
  if (s.kind == simulate::FunctionalKind::Z) s.betas = parse_real_list(p.betas);
  s.z = p.z;
  s.side = parse_side(p.side);
  s.ells = parse_ell_list(p.ell);
  s.replicas = p.reps;
  s.seed = p.seed;
  s.threads = p.threads;
  s.allow_odd = p.allow_odd;
  s.excursion_degree_factor = p.grid_factor;
  s.node_budget = p.max_nodes;
  return s;
}

void cmd_simulate(const Params& p, Context& ctx) {
  auto spec = sweep_spec(p);
  if (p.reps < 1) throw DomainError("simulate: --reps must be positive");
  if (spec.kind == simulate::FunctionalKind::h && spec.q < 0) throw DomainError("simulate: --q must be >= 0");
  if (spec.kind == simulate::FunctionalKind::Z && spec.betas.size() < 2)
    throw DomainError("simulate: --betas needs at least two coefficients");
  std::string tag = spec.kind == simulate::FunctionalKind::h   ? "h" + std::to_string(spec.q)
                    : spec.kind == simulate::FunctionalKind::Z ? "Z"
                                                               : "S";
  report::CsvWriter csv(ctx.path("simulate.csv"), {"replica", "d", "q_or_kind", "ell", "z", "raw", "normalized"});
  json grids = json::array();
  bool residual_ok = true;
  for (int ell : spec.ells) {
    int degree = clt::grid_degree(spec, ell);
    auto grid = simulate::build_grid(spec.d, degree, spec.node_budget);
    simulate::FieldSampler sampler(grid, ell);
    const std::uint64_t master = clt::row_seed(spec.seed, ell);
    std::vector<simulate::FunctionalSample> out(p.reps);
    parallel_for(p.reps, p.threads, [&](std::size_t r) { out[r] = clt::evaluate(spec, sampler.sample(master, r)); });
    double mean = 0.0;
    for (std::size_t r = 0; r < p.reps; ++r) {
      const auto& s = out[r];
      mean += s.raw;
      csv.row({fmt_int(static_cast<long long>(r)), fmt_int(spec.d), tag, fmt_int(ell),
               spec.kind == simulate::FunctionalKind::S ? format_real(spec.z) : "", format_real(s.raw),
               s.normalized ? format_real(*s.normalized) : ""});
    }
    mean /= static_cast<double>(p.reps);
    if (spec.d >= 3) residual_ok = residual_ok && sampler.factor_residual() <= 1e-8;
    grids.push_back({{"ell", ell},
                     {"grid", grid->descriptor()},
                     {"nodes", grid->size()},
                     {"exact_degree", grid->exact_degree},
                     {"factor_rank", sampler.rank()},
                     {"factor_residual", sampler.factor_residual()},
                     {"stream_master", clt::row_seed(spec.seed, ell)},
                     {"sample_mean", mean},
                     {"theory_mean", out.front().mean},
                     {"theory_variance", out.front().variance},
                     {"approximate", out.front().approximate}});
  }
  ctx.summary["grids"] = grids;
  if (spec.d >= 3) ctx.check("factor_residual", residual_ok, {{"limit", 1e-8}});
}

json row_json(const clt::SweepRow& r) {
  return {{"ell", r.ell},
          {"grid_degree", r.grid_degree},
          {"empirical_dK", r.empirical_dK},
          {"empirical_dW", r.empirical_dW},
          {"sample_mean", r.sample_mean},
          {"sample_var", r.sample_var},
          {"theory_mean", r.theory_mean},
          {"theory_var", r.theory_var},
          {"explicit_bound", real_json(r.explicit_bound)},
          {"grid_refinement", real_json(r.grid_refinement)}};
}

void sweep_outputs(const clt::Report& rep, const std::string& stem, Context& ctx) {
  report::CsvWriter csv(
      ctx.path(stem + ".csv"),
      {"ell", "replicas", "empirical_dK", "empirical_dW", "mc_stderr_scale", "theoretical_rate", "explicit_bound",
       "sample_mean", "sample_mean_stderr", "sample_var", "sample_var_stderr", "theory_mean", "theory_var",
       "grid_degree", "grid_refinement"});
  std::vector<int> ells;
  std::vector<double> dk, dw, rate, bound;
  json rows = json::array();
  for (const auto& r : rep.rows) {
    csv.row({fmt_int(r.ell), fmt_int(static_cast<long long>(r.replicas)), format_real(r.empirical_dK),
             format_real(r.empirical_dW), format_real(r.mc_stderr_scale), format_real(r.theoretical_rate),
             format_real(r.explicit_bound), format_real(r.sample_mean), format_real(r.sample_mean_stderr),
             format_real(r.sample_var), format_real(r.sample_var_stderr), format_real(r.theory_mean),
             format_real(r.theory_var), fmt_int(r.grid_degree), format_real(r.grid_refinement)});
    ells.push_back(r.ell);
    dk.push_back(r.empirical_dK);
    dw.push_back(r.empirical_dW);
    rate.push_back(r.theoretical_rate);
    bound.push_back(r.explicit_bound);
    rows.push_back(row_json(r));
  }
  write_plot(ctx, stem + "_dK.dat", "log ell, log d_K", ells, dk);
  write_plot(ctx, stem + "_dW.dat", "log ell, log d_W", ells, dw);
  write_plot(ctx, stem + "_rate.dat", "log ell, log theoretical rate (" + rep.rate_label + ")", ells, rate);
  if (rep.kind != simulate::FunctionalKind::S)
    write_plot(ctx, stem + "_bound.dat", "log ell, log explicit Kolmogorov bound", ells, bound);
  ctx.summary["rate_label"] = rep.rate_label;
  ctx.summary["rows"] = rows;
  for (const auto& w : rep.warnings) ctx.warn(w);
  if (rep.rows.size() >= 3) {
    auto fit = clt::rate_fit(rep);
    ctx.summary["rate_fit"] = {{"fitted", fit.fitted},
                               {"rows_used", fit.rows_used},
                               {"slope", fit.fitted ? real_json(fit.slope) : json(nullptr)},
                               {"slope_stderr", fit.fitted ? real_json(fit.slope_stderr) : json(nullptr)},
                               {"theoretical_slope", fit.fitted ? real_json(fit.theoretical_slope) : json(nullptr)}};
    if (fit.fitted)
      ctx.check("decay_not_slower_than_rate", fit.consistent, {{"slope", fit.slope}, {"theoretical", fit.theoretical_slope}});
    else
      ctx.warn("rate fit skipped: fewer than two rows above the Monte Carlo floor");
  }
}

void cmd_clt(const Params& p, Context& ctx) {
  auto spec = sweep_spec(p);
  auto rep = clt::clt_sweep(spec);
  sweep_outputs(rep, "clt", ctx);
  if (rep.kind != simulate::FunctionalKind::S) {
    bool ok = true;
    for (const auto& r : rep.rows) ok = ok && r.empirical_dK <= r.explicit_bound + 3.0 * r.mc_stderr_scale;
    ctx.check("dK_below_bound_plus_3_floor", ok);
  }
}

void cmd_excursion(const Params& p, Context& ctx) {
  Params q = p;
  q.kind = "S";
  auto spec = sweep_spec(q);
  auto rep = clt::clt_sweep(spec);
  sweep_outputs(rep, "excursion", ctx);
  bool mean_ok = true, var_ok = true;
  for (const auto& r : rep.rows) {
    mean_ok = mean_ok && std::abs(r.sample_mean - r.theory_mean) <= 4.0 * r.sample_mean_stderr;
    var_ok = var_ok && std::abs(r.sample_var - r.theory_var) <= 4.0 * r.sample_var_stderr;
  }
  ctx.check("mean_within_4_stderr", mean_ok);
  ctx.check("variance_within_4_stderr", var_ok);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian spherical eigenfunction chaos: moments, contractions, simulation, CLT sweeps"};
  app.set_version_flag("--version", SPHCHAOS_VERSION);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> cmds;
  auto make = [&](const std::string& name, const std::string& help, const std::string& ell_default) -> Command& {
    auto c = std::make_unique<Command>();
    c->name = name;
    c->app = app.add_subcommand(name, help);
    c->p.ell = ell_default;
    cmds.push_back(std::move(c));
    return *cmds.back();
  };

  {
    auto& c = make("moments", "Gegenbauer moments, variances, Bessel constants, ratios", "16..1024");
    c.add("d", c.p.d, "sphere dimension (>= 2)");
    c.add("q", c.p.q, "power / chaos order (>= 2)");
    c.add("ell", c.p.ell, "multipoles: list 16,64 / dyadic 256..8192 / range a:b:step");
    c.add("tol", c.p.tol, "relative and absolute quadrature tolerance");
    c.common();
  }
  {
    auto& c = make("contractions", "Contraction norms K(q;r) and fourth-moment bounds", "8");
    c.add("d", c.p.d, "sphere dimension (>= 2)");
    c.add("q", c.p.q, "chaos order (>= 2)");
    c.add("ell", c.p.ell, "multipoles");
    c.add("r", c.p.r, "single contraction order (0: all)");
    c.add("mc-samples", c.p.mc_samples, "Monte Carlo quadruples per (ell, r) for the cross-check (0: off)");
    c.seeded();
    c.common();
  }
  auto field_opts = [](Command& c) {
    c.add("kind", c.p.kind, "functional: h (Hermite), Z (polynomial), S (excursion)");
    c.add("d", c.p.d, "sphere dimension (>= 2)");
    c.add("q", c.p.q, "Hermite order for kind h");
    c.add("betas", c.p.betas, "monomial coefficients b0,b1,...,bQ for kind Z");
    c.add("z", c.p.z, "level for kind S");
    c.add("side", c.p.side, "excursion side: below (T <= z) or above (T > z)");
    c.add("grid-factor", c.p.grid_factor, "grid degree / ell for kind S");
    c.add("max-nodes", c.p.max_nodes, "grid node budget");
  };
  {
    auto& c = make("simulate", "Replica-level functional values", "16");
    field_opts(c);
    c.add("ell", c.p.ell, "multipoles");
    c.add("reps", c.p.reps, "replicas per multipole");
    c.seeded();
    c.common();
  }
  {
    auto& c = make("clt", "Distance-to-normal sweep across multipoles", "16,64,128");
    field_opts(c);
    c.add("ell", c.p.ell, "multipoles (even unless --allow-odd)");
    c.add("reps", c.p.reps, "replicas per multipole (>= 200)");
    c.flag("allow-odd", c.p.allow_odd, "permit odd multipoles");
    c.seeded();
    c.common();
  }
  {
    auto& c = make("excursion", "Excursion measure sweep: mean, variance, distances", "16,64");
    c.add("d", c.p.d, "sphere dimension (>= 2)");
    c.add("z", c.p.z, "level");
    c.add("side", c.p.side, "below (T <= z) or above (T > z)");
    c.add("ell", c.p.ell, "multipoles (even unless --allow-odd)");
    c.add("reps", c.p.reps, "replicas per multipole (>= 200)");
    c.add("grid-factor", c.p.grid_factor, "grid degree / ell");
    c.add("max-nodes", c.p.max_nodes, "grid node budget");
    c.flag("allow-odd", c.p.allow_odd, "permit odd multipoles");
    c.seeded();
    c.common();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Command* cmd = nullptr;
  for (auto& c : cmds)
    if (c->app->parsed()) cmd = c.get();
  if (!cmd) return 2;

  std::string seed_source = cmd->uses_seed && cmd->seed_opt->count() > 0 ? "flag" : "none";
  try {
    if (!cmd->p.config.empty()) {
      for (const auto& [key, value] : read_config_file(cmd->p.config)) {
        CLI::Option* opt = key == "config" || key == "help" ? nullptr : cmd->app->get_option_no_throw("--" + key);
        if (!opt) throw DomainError("unknown config key '" + key + "' for " + cmd->name);
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
        if (opt == cmd->seed_opt) seed_source = "config";
      }
    }
  } catch (const CLI::Error& e) {
    err << "config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "config: " << e.what() << '\n';
    return 2;
  }
  if (cmd->uses_seed && seed_source == "none") {
    std::random_device rd;
    cmd->p.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    seed_source = "entropy";
  }

  Context ctx;
  ctx.name = cmd->name;
  ctx.dir = cmd->p.out;
  try {
    std::filesystem::create_directories(ctx.dir);
    if (cmd->name == "moments") cmd_moments(cmd->p, ctx);
    else if (cmd->name == "contractions") cmd_contractions(cmd->p, ctx);
    else if (cmd->name == "simulate") cmd_simulate(cmd->p, ctx);
    else if (cmd->name == "clt") cmd_clt(cmd->p, ctx);
    else cmd_excursion(cmd->p, ctx);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InsufficientData& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  // A request that uses the seed stochastically (contractions only with MC).
  bool stochastic = cmd->uses_seed && !(cmd->name == "contractions" && cmd->p.mc_samples == 0);

  json config = json::object();
  for (const auto& [key, get] : cmd->echo) config[key] = get();
  json manifest = {{"format", kFormat},
                   {"version", SPHCHAOS_VERSION},
                   {"command", cmd->name},
                   {"seed", stochastic ? json(cmd->p.seed) : json(nullptr)},
                   {"seed_source", stochastic ? seed_source : "none"},
                   {"config", config},
                   {"outputs", ctx.outputs},
                   {"checks", ctx.checks},
                   {"passed", ctx.passed},
                   {"warnings", ctx.warnings},
                   {"summary", ctx.summary}};
  const std::string mpath = (ctx.dir / (cmd->name + ".json")).string();
  std::ofstream mf(mpath, std::ios::binary);
  mf << manifest.dump(2) << '\n';
  if (!mf) {
    err << "cannot write " << mpath << '\n';
    return 1;
  }
  for (const auto& w : ctx.warnings) err << "warning: " << w.get<std::string>() << '\n';
  std::size_t failed = 0;
  for (const auto& c : ctx.checks)
    if (!c["pass"].get<bool>()) {
      ++failed;
      err << "check failed: " << c["name"].get<std::string>() << '\n';
    }
  out << cmd->name << ": wrote " << ctx.outputs.size() << " files and " << mpath << "; " << ctx.checks.size() - failed
      << "/" << ctx.checks.size() << " checks passed\n";
  return ctx.passed ? 0 : 1;
}

}  // namespace sphchaos::cli
