#pragma once

// Bayesian linear regression with known noise variance:
//   y | X, beta ~ MVN_n(X beta, sigma2 I_n),   beta ~ MVN_d(0, I_d / alpha).
// Posterior MVN_d(m_n, Sigma_n), Sigma_n^-1 = X^T X / sigma2 + alpha I_d;
// marginal MVN_n(y; 0, X X^T / alpha + sigma2 I_n).

#include <cmath>
#include <cstdint>
#include <random>

#include "thames/core.hpp"
#include "thames/error.hpp"
#include "thames/models/gaussian.hpp"
#include "thames/rng.hpp"

namespace thames::models {

struct LinRegModel {
  Matrix X;  // n x d
  Vector y;
  double sigma2;
  double alpha;

  Eigen::Index dim() const { return X.cols(); }
  Eigen::Index n() const { return X.rows(); }
};

struct LinRegPosterior {
  Vector mean;
  Matrix cov;
  Matrix precision_chol;  // lower L with L L^T = Sigma_n^-1
};

inline void validate(const LinRegModel& m) {
  require(m.X.rows() >= 1 && m.X.cols() >= 1, ErrorKind::InvalidInput, "design matrix is empty");
  require(m.y.size() == m.X.rows(), ErrorKind::InvalidInput, "y length does not match X rows");
  require(std::isfinite(m.sigma2) && m.sigma2 > 0.0, ErrorKind::InvalidInput, "sigma2 must be positive");
  require(std::isfinite(m.alpha) && m.alpha > 0.0, ErrorKind::InvalidInput, "alpha must be positive");
  require(m.X.allFinite() && m.y.allFinite(), ErrorKind::InvalidInput, "regression data must be finite");
}

inline LinRegPosterior linreg_posterior_params(const LinRegModel& m) {
  validate(m);
  const Eigen::Index d = m.dim();
  Matrix precision = m.X.transpose() * m.X / m.sigma2;
  precision.diagonal().array() += m.alpha;
  Eigen::LLT<Matrix> llt(precision);
  require(llt.info() == Eigen::Success, ErrorKind::NumericalFailure, "posterior precision factorization failed");
  const Vector mean = llt.solve(m.X.transpose() * m.y / m.sigma2);
  const Matrix cov = llt.solve(Matrix::Identity(d, d));
  return LinRegPosterior{mean, 0.5 * (cov + cov.transpose()), llt.matrixL()};
}

/// Exact log marginal through d x d quantities only:
///   log|X X^T / alpha + sigma2 I| = n log sigma2 + log|I + X^T X / (alpha sigma2)|,
///   y^T C^-1 y = (y^T y - y^T X (alpha sigma2 I + X^T X)^-1 X^T y) / sigma2.
inline double linreg_exact_log_marginal(const LinRegModel& m) {
  validate(m);
  const double n = static_cast<double>(m.n());
  const double as2 = m.alpha * m.sigma2;
  Matrix inner = m.X.transpose() * m.X;
  inner.diagonal().array() += as2;  // = alpha sigma2 (I + X^T X / (alpha sigma2))
  Eigen::LLT<Matrix> llt(inner);
  require(llt.info() == Eigen::Success, ErrorKind::NumericalFailure, "Woodbury factorization failed");
  double log_det_inner = 0.0;
  for (Eigen::Index j = 0; j < inner.rows(); ++j) log_det_inner += 2.0 * std::log(llt.matrixL()(j, j));
  const double log_det_c = n * std::log(m.sigma2) + log_det_inner - static_cast<double>(m.dim()) * std::log(as2);
  const Vector xty = m.X.transpose() * m.y;
  const double quad = (m.y.squaredNorm() - xty.dot(llt.solve(xty))) / m.sigma2;
  return -0.5 * n * kLog2Pi - 0.5 * log_det_c - 0.5 * quad;
}

inline double linreg_log_prior(const LinRegModel& m, const Vector& beta) {
  const double d = static_cast<double>(beta.size());
  return 0.5 * d * (std::log(m.alpha) - kLog2Pi) - 0.5 * m.alpha * beta.squaredNorm();
}

inline double linreg_log_likelihood(const LinRegModel& m, const Vector& beta) {
  require(beta.size() == m.dim(), ErrorKind::InvalidInput, "beta dimension mismatch");
  const double n = static_cast<double>(m.n());
  return -0.5 * n * (kLog2Pi + std::log(m.sigma2)) - 0.5 * (m.y - m.X * beta).squaredNorm() / m.sigma2;
}

inline double linreg_log_posterior_density(const LinRegModel& m, const Vector& beta) {
  const LinRegPosterior post = linreg_posterior_params(m);
  const double d = static_cast<double>(beta.size());
  double log_det_precision = 0.0;
  for (Eigen::Index j = 0; j < post.precision_chol.rows(); ++j) {
    log_det_precision += 2.0 * std::log(post.precision_chol(j, j));
  }
  const Vector z = post.precision_chol.transpose() * (beta - post.mean);
  return -0.5 * d * kLog2Pi + 0.5 * log_det_precision - 0.5 * z.squaredNorm();
}

/// T exact draws: beta = m_n + L^-T z with L L^T the posterior precision.
inline DrawMatrix linreg_posterior_sample(const LinRegModel& m, std::size_t t, std::uint64_t seed) {
  const LinRegPosterior post = linreg_posterior_params(m);
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index d = m.dim();
  Matrix z(d, static_cast<Eigen::Index>(t));
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j, i) = normal(rng);
  }
  Matrix draws = post.precision_chol.transpose().triangularView<Eigen::Upper>().solve(z);
  draws.colwise() += post.mean;
  return draws.transpose();
}

inline LogDensityVector linreg_log_post(const LinRegModel& m, const DrawMatrix& draws) {
  validate(m);
  require(draws.cols() == m.dim(), ErrorKind::InvalidInput, "draw dimension mismatch");
  const Matrix residuals = (m.X * draws.transpose()).colwise() - m.y;  // n x T, sign irrelevant
  const double n = static_cast<double>(m.n());
  const double d = static_cast<double>(m.dim());
  const double const_lik = -0.5 * n * (kLog2Pi + std::log(m.sigma2));
  const double const_prior = 0.5 * d * (std::log(m.alpha) - kLog2Pi);
  LogDensityVector out(draws.rows());
  for (Eigen::Index t = 0; t < draws.rows(); ++t) {
    out[t] = const_lik - 0.5 * residuals.col(t).squaredNorm() / m.sigma2 + const_prior -
             0.5 * m.alpha * draws.row(t).squaredNorm();
  }
  return out;
}

}  // namespace thames::models
