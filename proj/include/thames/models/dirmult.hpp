#pragma once

// Dirichlet-multinomial model:
//   mu ~ Dirichlet(a0, ..., a0) on K categories,  y_i | mu ~ Multinomial(l, mu).
// The estimator works on the d = K - 1 free coordinates (mu_1..mu_d); the last
// one is 1 - sum. Posterior Dirichlet(alpha), alpha_k = a0 + sum_i y_ik.
//
// Likelihoods include the multinomial coefficients log l! - sum_k log y_ik!.

#include <cmath>
#include <cstdint>
#include <random>

#include "thames/core.hpp"
#include "thames/correction.hpp"
#include "thames/error.hpp"
#include "thames/rng.hpp"

namespace thames::models {

using CountMatrix = Eigen::MatrixXi;

struct DirMultModel {
  int K;
  int l;
  double a0;
  CountMatrix counts;  // n x K, each row sums to l

  Eigen::Index dim() const { return K - 1; }
};

inline void validate(const DirMultModel& m) {
  require(m.K >= 2, ErrorKind::InvalidInput, "dirichlet-multinomial needs K >= 2");
  require(m.l >= 0, ErrorKind::InvalidInput, "trials per observation must be >= 0");
  require(std::isfinite(m.a0) && m.a0 > 0.0, ErrorKind::InvalidInput, "a0 must be positive");
  require(m.counts.cols() == m.K && m.counts.rows() >= 1, ErrorKind::InvalidInput,
          "count matrix must be n x K with n >= 1");
  require((m.counts.array() >= 0).all(), ErrorKind::InvalidInput, "counts must be nonnegative");
  for (Eigen::Index i = 0; i < m.counts.rows(); ++i) {
    require(m.counts.row(i).sum() == m.l, ErrorKind::InvalidInput,
            "row " + std::to_string(i) + " does not sum to l");
  }
}

inline Vector dirmult_posterior_alpha(const DirMultModel& m) {
  validate(m);
  return (m.counts.colwise().sum().cast<double>().array() + m.a0).matrix().transpose();
}

/// Sum over observations of log l! - sum_k log y_ik!.
inline double dirmult_log_coefficients(const DirMultModel& m) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.counts.rows(); ++i) {
    total += log_gamma(m.l + 1.0);
    for (Eigen::Index k = 0; k < m.K; ++k) total -= log_gamma(m.counts(i, k) + 1.0);
  }
  return total;
}

/// log Dirichlet(mu; alpha) for a full K-vector mu; -inf outside the open simplex.
inline double log_dirichlet_density(const Vector& mu_full, const Vector& alpha) {
  double out = log_gamma(alpha.sum());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (!(mu_full[k] > 0.0)) return kNegInf;
    out += (alpha[k] - 1.0) * std::log(mu_full[k]) - log_gamma(alpha[k]);
  }
  return out;
}

/// Appends the implied last coordinate 1 - sum(mu).
inline Vector complete_simplex(const Vector& mu) {
  Vector full(mu.size() + 1);
  full.head(mu.size()) = mu;
  full[mu.size()] = 1.0 - mu.sum();
  return full;
}

inline double dirmult_log_prior(const DirMultModel& m, const Vector& mu) {
  return log_dirichlet_density(complete_simplex(mu), Vector::Constant(m.K, m.a0));
}

inline double dirmult_log_likelihood(const DirMultModel& m, const Vector& mu) {
  require(mu.size() == m.dim(), ErrorKind::InvalidInput, "mu dimension mismatch");
  const Vector full = complete_simplex(mu);
  const Eigen::VectorXd totals = m.counts.colwise().sum().cast<double>().transpose();
  double out = dirmult_log_coefficients(m);
  for (Eigen::Index k = 0; k < m.K; ++k) {
    if (totals[k] == 0.0) continue;
    if (!(full[k] > 0.0)) return kNegInf;
    out += totals[k] * std::log(full[k]);
  }
  return out;
}

inline double dirmult_log_posterior_density(const DirMultModel& m, const Vector& mu) {
  return log_dirichlet_density(complete_simplex(mu), dirmult_posterior_alpha(m));
}

/// Exact log marginal from Bayes' identity log p(y) = log pi(mu*) + log L(mu*) - log p(mu* | y),
/// evaluated at the posterior mean (clamped away from the boundary).
inline double dirmult_exact_log_marginal(const DirMultModel& m) {
  const Vector alpha = dirmult_posterior_alpha(m);
  Vector mean = (alpha / alpha.sum()).cwiseMax(1e-12);
  mean /= mean.sum();
  const Vector mu = mean.head(m.dim());
  return dirmult_log_prior(m, mu) + dirmult_log_likelihood(m, mu) - dirmult_log_posterior_density(m, mu);
}

/// Same quantity assembled from Gamma-function ratios:
///   coefficients + lgamma(K a0) - K lgamma(a0) + sum_k lgamma(alpha_k) - lgamma(sum alpha).
inline double dirmult_log_marginal_closed_form(const DirMultModel& m) {
  const Vector alpha = dirmult_posterior_alpha(m);
  double out = dirmult_log_coefficients(m) + log_gamma(m.K * m.a0) - m.K * log_gamma(m.a0) -
               log_gamma(alpha.sum());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) out += log_gamma(alpha[k]);
  return out;
}

/// Dirichlet(alpha) draws via normalized Gamma variates.
inline Matrix dirichlet_sample(const Vector& alpha, std::size_t t, CounterRng& rng) {
  Matrix out(static_cast<Eigen::Index>(t), alpha.size());
  std::vector<std::gamma_distribution<double>> gammas;
  gammas.reserve(static_cast<std::size_t>(alpha.size()));
  for (Eigen::Index k = 0; k < alpha.size(); ++k) gammas.emplace_back(alpha[k], 1.0);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double sum = 0.0;
    do {
      sum = 0.0;
      for (Eigen::Index k = 0; k < alpha.size(); ++k) {
        out(i, k) = gammas[static_cast<std::size_t>(k)](rng);
        sum += out(i, k);
      }
    } while (!(sum > 0.0));
    out.row(i) /= sum;
  }
  return out;
}

/// T exact posterior draws of (mu_1..mu_d); the last coordinate is dropped.
inline DrawMatrix dirmult_posterior_sample(const DirMultModel& m, std::size_t t, std::uint64_t seed) {
  CounterRng rng(seed);
  return dirichlet_sample(dirmult_posterior_alpha(m), t, rng).leftCols(m.dim());
}

inline LogDensityVector dirmult_log_post(const DirMultModel& m, const DrawMatrix& draws) {
  const Vector alpha = dirmult_posterior_alpha(m);
  require(draws.cols() == m.dim(), ErrorKind::InvalidInput, "draw dimension mismatch");
  const double constant = dirmult_log_coefficients(m) + log_gamma(m.K * m.a0) - m.K * log_gamma(m.a0);
  LogDensityVector out(draws.rows());
  for (Eigen::Index t = 0; t < draws.rows(); ++t) {
    double acc = constant;
    double rest = 1.0;
    for (Eigen::Index k = 0; k < m.dim() && acc != kNegInf; ++k) {
      const double v = draws(t, k);
      rest -= v;
      acc = v > 0.0 ? acc + (alpha[k] - 1.0) * std::log(v) : kNegInf;
    }
    if (acc != kNegInf) acc = rest > 0.0 ? acc + (alpha[m.K - 1] - 1.0) * std::log(rest) : kNegInf;
    out[t] = acc;
  }
  return out;
}

inline SupportPredicate dirmult_support(const DirMultModel& m) {
  return simplex_support(static_cast<std::size_t>(m.dim()));
}

/// n rows of Multinomial(l, mu), drawn by sequential conditional binomials.
inline CountMatrix multinomial_dataset(const Vector& mu, int n, int l, std::uint64_t seed) {
  require(mu.size() >= 2 && n >= 1 && l >= 0, ErrorKind::InvalidInput, "bad multinomial dataset spec");
  require((mu.array() >= 0.0).all() && std::abs(mu.sum() - 1.0) < 1e-9, ErrorKind::InvalidInput,
          "mu must be a probability vector");
  CounterRng rng(seed);
  CountMatrix counts = CountMatrix::Zero(n, mu.size());
  for (int i = 0; i < n; ++i) {
    int remaining = l;
    double mass = 1.0;
    for (Eigen::Index k = 0; k + 1 < mu.size() && remaining > 0; ++k) {
      const double p = mass > 0.0 ? std::clamp(mu[k] / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<int> binom(remaining, p);
      const int x = binom(rng);
      counts(i, k) = x;
      remaining -= x;
      mass -= mu[k];
    }
    counts(i, mu.size() - 1) += remaining;
  }
  return counts;
}

/// One mu ~ Dirichlet(a0, ..., a0) on K categories.
inline Vector random_simplex_point(int K, double a0, std::uint64_t seed) {
  CounterRng rng(seed);
  return dirichlet_sample(Vector::Constant(K, a0), 1, rng).row(0).transpose();
}

}  // namespace thames::models
