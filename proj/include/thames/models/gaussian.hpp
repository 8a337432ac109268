#pragma once

// Multivariate Gaussian mean model:
//   y_i | mu ~ MVN_d(mu, I_d),  i = 1..n,     mu ~ MVN_d(0, s0 I_d).
// Posterior MVN_d(m_n, s_n I_d) with m_n = n ybar / (n + 1/s0), s_n = 1 / (n + 1/s0).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "thames/core.hpp"
#include "thames/error.hpp"
#include "thames/rng.hpp"

namespace thames::models {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct GaussianMeanModel {
  double s0;
  Matrix data;  // n x d

  Eigen::Index dim() const { return data.cols(); }
  Eigen::Index n() const { return data.rows(); }
};

struct GaussianPosterior {
  Vector mean;
  double var;
};

inline void validate(const GaussianMeanModel& m) {
  require(std::isfinite(m.s0) && m.s0 > 0.0, ErrorKind::InvalidInput, "s0 must be positive");
  require(m.data.rows() >= 1 && m.data.cols() >= 1, ErrorKind::InvalidInput,
          "gaussian model needs n >= 1 and d >= 1");
  require(m.data.allFinite(), ErrorKind::InvalidInput, "gaussian data must be finite");
}

inline GaussianPosterior gaussian_posterior_params(const GaussianMeanModel& m) {
  validate(m);
  const double n = static_cast<double>(m.n());
  const double precision = n + 1.0 / m.s0;
  const Vector ybar = m.data.colwise().mean().transpose();
  return GaussianPosterior{(n / precision) * ybar, 1.0 / precision};
}

/// log p(y.j) for one data column under MVN_n(0, s0 1 1^T + I_n), by the
/// rank-one determinant and inverse identities.
inline double gaussian_column_log_marginal(const Vector& column, double s0) {
  const double n = static_cast<double>(column.size());
  const double sum = column.sum();
  const double quad = column.squaredNorm() - s0 / (1.0 + n * s0) * sum * sum;
  return -0.5 * n * kLog2Pi - 0.5 * std::log1p(n * s0) - 0.5 * quad;
}

/// Exact log marginal likelihood: sum over columns of the per-column Gaussian marginal.
inline double gaussian_exact_log_marginal(const GaussianMeanModel& m) {
  validate(m);
  double total = 0.0;
  for (Eigen::Index j = 0; j < m.dim(); ++j) total += gaussian_column_log_marginal(m.data.col(j), m.s0);
  return total;
}

inline double gaussian_log_prior(const GaussianMeanModel& m, const Vector& mu) {
  const double d = static_cast<double>(mu.size());
  return -0.5 * d * (kLog2Pi + std::log(m.s0)) - 0.5 * mu.squaredNorm() / m.s0;
}

namespace detail {
struct GaussianStats {
  Vector sum;      // per-column sum of y
  double sum_sq;   // total sum of y^2
};
inline GaussianStats gaussian_stats(const GaussianMeanModel& m) {
  return GaussianStats{m.data.colwise().sum().transpose(), m.data.squaredNorm()};
}
inline double gaussian_log_likelihood(const detail::GaussianStats& s, double n, const Vector& mu) {
  // sum_i ||y_i - mu||^2 = sum y^2 - 2 mu . sum_i y_i + n ||mu||^2
  const double rss = s.sum_sq - 2.0 * mu.dot(s.sum) + n * mu.squaredNorm();
  return -0.5 * n * static_cast<double>(mu.size()) * kLog2Pi - 0.5 * rss;
}
}  // namespace detail

inline double gaussian_log_likelihood(const GaussianMeanModel& m, const Vector& mu) {
  require(mu.size() == m.dim(), ErrorKind::InvalidInput, "mu dimension mismatch");
  return detail::gaussian_log_likelihood(detail::gaussian_stats(m), static_cast<double>(m.n()), mu);
}

inline double gaussian_log_posterior_density(const GaussianMeanModel& m, const Vector& mu) {
  const GaussianPosterior post = gaussian_posterior_params(m);
  const double d = static_cast<double>(mu.size());
  return -0.5 * d * (kLog2Pi + std::log(post.var)) - 0.5 * (mu - post.mean).squaredNorm() / post.var;
}

/// T exact iid posterior draws.
inline DrawMatrix gaussian_posterior_sample(const GaussianMeanModel& m, std::size_t t, std::uint64_t seed) {
  const GaussianPosterior post = gaussian_posterior_params(m);
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(post.var);
  DrawMatrix draws(static_cast<Eigen::Index>(t), m.dim());
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < draws.cols(); ++j) draws(i, j) = post.mean[j] + sd * normal(rng);
  }
  return draws;
}

/// Per-draw log likelihood.
inline Vector gaussian_log_likelihoods(const GaussianMeanModel& m, const DrawMatrix& draws) {
  validate(m);
  require(draws.cols() == m.dim(), ErrorKind::InvalidInput, "draw dimension mismatch");
  const auto stats = detail::gaussian_stats(m);
  const double n = static_cast<double>(m.n());
  Vector out(draws.rows());
  for (Eigen::Index t = 0; t < draws.rows(); ++t) {
    out[t] = detail::gaussian_log_likelihood(stats, n, draws.row(t).transpose());
  }
  return out;
}

/// Per-draw log prior + log likelihood.
inline LogDensityVector gaussian_log_post(const GaussianMeanModel& m, const DrawMatrix& draws) {
  Vector out = gaussian_log_likelihoods(m, draws);
  for (Eigen::Index t = 0; t < draws.rows(); ++t) out[t] += gaussian_log_prior(m, draws.row(t).transpose());
  return out;
}

/// n observations from MVN_d(mu_value * 1_d, I_d).
inline Matrix gaussian_dataset(Eigen::Index d, Eigen::Index n, double mu_value, std::uint64_t seed) {
  require(d >= 1 && n >= 1, ErrorKind::InvalidInput, "gaussian_dataset needs d, n >= 1");
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  Matrix y(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) y(i, j) = mu_value + normal(rng);
  }
  return y;
}

}  // namespace thames::models
