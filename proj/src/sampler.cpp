#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sphchaos/errors.hpp"
#include "sphchaos/rng.hpp"
#include "sphchaos/simulate.hpp"

namespace sphchaos::simulate {

void normalized_legendre(int ell, double t, double* out) {
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  const double ln_s = std::log(s);  // -inf at the poles, handled below
  const double rescale = std::log(1e200);
  double log_pmm = -0.5 * std::log(4.0 * std::numbers::pi);
  for (int m = 0; m <= ell; ++m) {
    if (m > 0) {
      if (s == 0.0) {
        out[m] = 0.0;
        continue;
      }
      log_pmm += 0.5 * std::log((2.0 * m + 1.0) / (2.0 * m)) + ln_s;
    }
    double prev = 1.0, cur = 1.0, scale = log_pmm;
    if (m < ell) {
      cur = std::sqrt(2.0 * m + 3.0) * t * prev;
      for (int L = m + 2; L <= ell; ++L) {
        double a = std::sqrt((4.0 * L * L - 1.0) / (static_cast<double>(L) * L - static_cast<double>(m) * m));
        double b = std::sqrt(((L - 1.0) * (L - 1.0) - static_cast<double>(m) * m) / (4.0 * (L - 1.0) * (L - 1.0) - 1.0));
        double next = a * (t * cur - b * prev);
        prev = cur;
        cur = next;
        if (std::abs(cur) > 1e200) {
          cur *= 1e-200;
          prev *= 1e-200;
          scale += rescale;
        }
      }
    }
    out[m] = cur == 0.0 ? 0.0 : std::copysign(std::exp(scale + std::log(std::abs(cur))), cur);
  }
}

FieldSampler::FieldSampler(std::shared_ptr<const SphereGrid> grid, int ell) : grid_(std::move(grid)), ell_(ell) {
  if (ell < 1) throw DomainError("FieldSampler: need ell >= 1");
  const SphereGrid& g = *grid_;
  const int d = g.dim.d;
  if (d == 2) {
    const int L1 = ell + 1;
    legendre_.resize(static_cast<std::size_t>(g.rings) * L1);
    for (int r = 0; r < g.rings; ++r) normalized_legendre(ell, g.ring_t[r], legendre_.data() + r * L1);
    cos_.resize(static_cast<std::size_t>(g.azimuths) * L1);
    sin_.resize(cos_.size());
    for (int j = 0; j < g.azimuths; ++j) {
      double phi = 2.0 * std::numbers::pi * j / g.azimuths;
      for (int m = 0; m <= ell; ++m) {
        cos_[j * L1 + m] = std::cos(m * phi);
        sin_[j * L1 + m] = std::sin(m * phi);
      }
    }
    rank_ = 2 * ell + 1;
    return;
  }

  if (ell > kDenseMaxEll)
    throw DomainError("FieldSampler: dense sampling for d >= 3 supports ell <= " + std::to_string(kDenseMaxEll));
  const std::size_t N = g.size();
  if (N > kDenseNodeCap)
    throw BudgetExceeded("FieldSampler: dense sampling needs at most " + std::to_string(kDenseNodeCap) + " nodes");
  specfun::GegenbauerCtx ctx(ell, g.dim);
  const int dp1 = d + 1;
  auto cov_row = [&](std::size_t i, Eigen::VectorXd& row) {
    const double* xi = g.node(i);
    for (std::size_t j = 0; j < N; ++j) {
      const double* xj = g.node(j);
      double t = 0.0;
      for (int c = 0; c < dp1; ++c) t += xi[c] * xj[c];
      row(j) = ctx.eval(std::clamp(t, -1.0, 1.0));
    }
  };
  const std::size_t n = static_cast<std::size_t>(specfun::dim_harmonics_real(ell, g.dim));
  const std::size_t cols = std::min(N, n + 16);

  // Range of C from a fixed random probe, then the eigendecomposition of C
  // restricted to that range.
  Eigen::MatrixXd probe(N, cols);
  {
    std::mt19937_64 eng = stream_engine(0x5EEDF00Dull, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < N; ++i) probe(i, j) = normal(eng);
  }
  Eigen::MatrixXd Y(N, cols);
  Eigen::VectorXd row(N);
  for (std::size_t i = 0; i < N; ++i) {
    cov_row(i, row);
    Y.row(i) = row.transpose() * probe;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, cols);
  Eigen::MatrixXd CQ(N, cols);
  for (std::size_t i = 0; i < N; ++i) {
    cov_row(i, row);
    CQ.row(i) = row.transpose() * Q;
  }
  Eigen::MatrixXd M = Q.transpose() * CQ;
  M = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  if (eig.info() != Eigen::Success) throw FactorizationError("FieldSampler: eigendecomposition failed");
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, lam.maxCoeff());
  if (lam.minCoeff() < -tol) throw FactorizationError("FieldSampler: covariance has a negative eigenvalue");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    if (lam(k) > tol) keep.push_back(k);
  rank_ = keep.size();
  Eigen::MatrixXd F(N, rank_);
  for (std::size_t k = 0; k < rank_; ++k) F.col(k) = Q * eig.eigenvectors().col(keep[k]) * std::sqrt(lam(keep[k]));

  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    cov_row(i, row);
    Eigen::VectorXd approx = F * F.row(i).transpose();
    worst = std::max(worst, (row - approx).cwiseAbs().maxCoeff());
  }
  residual_ = worst;
  if (worst > 1e-8)
    throw FactorizationError("FieldSampler: covariance factor residual " + std::to_string(worst) + " exceeds 1e-8");
  factor_.resize(N * rank_);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < rank_; ++k) factor_[i * rank_ + k] = F(i, k);
}

FieldRealization FieldSampler::sample(std::uint64_t master_seed, std::uint64_t replica) const {
  const SphereGrid& g = *grid_;
  FieldRealization out;
  out.grid = grid_;
  out.ell = ell_;
  out.master_seed = master_seed;
  out.replica = replica;
  out.values.assign(g.size(), 0.0);
  std::mt19937_64 eng = stream_engine(master_seed, replica);
  std::normal_distribution<double> normal(0.0, 1.0);

  if (g.dim.d == 2) {
    const int L1 = ell_ + 1;
    const double sigma = std::sqrt(g.dim.mu_d / (2.0 * ell_ + 1.0));
    out.coefficients.resize(2 * ell_ + 1);
    for (double& a : out.coefficients) a = sigma * normal(eng);
    std::vector<double> A(L1), B(L1);
    for (int r = 0; r < g.rings; ++r) {
      const double* P = legendre_.data() + r * L1;
      A[0] = out.coefficients[0] * P[0];
      B[0] = 0.0;
      for (int m = 1; m <= ell_; ++m) {
        A[m] = std::numbers::sqrt2 * P[m] * out.coefficients[2 * m - 1];
        B[m] = std::numbers::sqrt2 * P[m] * out.coefficients[2 * m];
      }
      double* v = out.values.data() + static_cast<std::size_t>(r) * g.azimuths;
      for (int j = 0; j < g.azimuths; ++j) {
        const double* c = cos_.data() + j * L1;
        const double* s = sin_.data() + j * L1;
        double acc = 0.0;
        for (int m = 0; m <= ell_; ++m) acc += A[m] * c[m] + B[m] * s[m];
        v[j] = acc;
      }
    }
    return out;
  }

  std::vector<double> xi(rank_);
  for (double& x : xi) x = normal(eng);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double* f = factor_.data() + i * rank_;
    double acc = 0.0;
    for (std::size_t k = 0; k < rank_; ++k) acc += f[k] * xi[k];
    out.values[i] = acc;
  }
  return out;
}

double FieldSampler::harmonic(int m, std::size_t node) const {
  const SphereGrid& g = *grid_;
  if (g.dim.d != 2) throw DomainError("harmonic: only available on S^2");
  if (m < -ell_ || m > ell_) throw DomainError("harmonic: |m| > ell");
  const int L1 = ell_ + 1;
  std::size_t r = node / g.azimuths, j = node % g.azimuths;
  double P = legendre_[r * L1 + std::abs(m)];
  if (m == 0) return P;
  return std::numbers::sqrt2 * P * (m > 0 ? cos_[j * L1 + m] : sin_[j * L1 - m]);
}

FieldRealization sample_field(int d, int ell, std::shared_ptr<const SphereGrid> grid, std::uint64_t seed,
                              std::uint64_t replica) {
  if (grid->dim.d != d) throw DomainError("sample_field: grid dimension does not match d");
  return FieldSampler(std::move(grid), ell).sample(seed, replica);
}

std::vector<double> analyze_coefficients(const FieldSampler& sampler, const FieldRealization& field) {
  const SphereGrid& g = sampler.grid();
  if (g.dim.d != 2) throw DomainError("analyze_coefficients: only available on S^2");
  const int ell = sampler.ell();
  std::vector<double> out(2 * ell + 1, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double wv = g.weights[i] * field.values[i];
    out[0] += wv * sampler.harmonic(0, i);
    for (int m = 1; m <= ell; ++m) {
      out[2 * m - 1] += wv * sampler.harmonic(m, i);
      out[2 * m] += wv * sampler.harmonic(-m, i);
    }
  }
  return out;
}

}  // namespace sphchaos::simulate
