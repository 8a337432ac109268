#pragma once

// The truncated harmonic mean estimator of 1/Z:
//
//   1/Z-hat = 1 / (V(A) T') * sum_{t in estimation set, theta_t in A} 1 / (L(theta_t) pi(theta_t))
//
// with A the Mahalanobis ellipsoid fitted to (by default) the first half of the
// draws and the sum taken over the second half. Every quantity is accumulated in
// log space; 1/Z-hat itself is routinely far below the double range.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "thames/core.hpp"
#include "thames/correction.hpp"
#include "thames/error.hpp"
#include "thames/radius.hpp"
#include "thames/result.hpp"

namespace thames {

namespace serial {
struct None {};
/// Inflate the variance by 1 / (1 - phi)^2, phi the lag-1 autocorrelation of the terms.
struct AR1 {};
/// Inflate the variance by a caller-supplied factor >= 1.
struct UserFactor {
  double factor;
};
}  // namespace serial

using SerialCorrection = std::variant<serial::None, serial::AR1, serial::UserFactor>;

/// Known posterior mean and covariance; bypasses fitting (and splitting) entirely.
struct OracleShape {
  Vector mean;
  Matrix covariance;
};

struct ThamesOptions {
  RadiusPolicy radius_policy = radius_policy::SqrtDPlusOne{};
  bool split = true;
  double split_fraction = 0.5;
  double ci_level = 0.95;
  SerialCorrection serial_correction = serial::None{};
  std::optional<ConstrainedCorrectionConfig> correction;
  bool ridge = false;
  std::optional<OracleShape> oracle;
};

// ---------------------------------------------------------------------------
// building blocks

/// log(exp(a) + exp(b)).
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

struct RecipVariance {
  double se_recip_rel;  // se(1/Z-hat) / (1/Z-hat)
  double log_se_recip;  // log se(1/Z-hat)
};

/// Plug-in iid standard error of 1/Z-hat. `log_terms` are log(1/(L pi)) for the
/// included draws only; the t_estimation - n excluded draws contribute zeros.
/// Computed from shifted moments: with s_k = sum exp(k (x - max)),
///   Var / mean^2 = T' s_2 / s_1^2 - 1   (divisor T'),
/// which never leaves the log/relative scale.
inline RecipVariance variance_recip_iid(std::span<const double> log_terms, std::size_t t_estimation,
                                        double log_vol) {
  require(log_terms.size() >= 2, ErrorKind::InsufficientData,
          "variance needs at least 2 included draws, got " + std::to_string(log_terms.size()));
  require(t_estimation >= log_terms.size(), ErrorKind::InvalidInput,
          "t_estimation smaller than the number of included draws");
  double m = kNegInf;
  for (double x : log_terms) {
    require(std::isfinite(x), ErrorKind::DegenerateTerm, "non-finite reciprocal term");
    m = std::max(m, x);
  }
  double s1 = 0.0;
  double s2 = 0.0;
  for (double x : log_terms) {
    const double e = std::exp(x - m);
    s1 += e;
    s2 += e * e;
  }
  const double t = static_cast<double>(t_estimation);
  const double cv2 = std::max(0.0, t * s2 / (s1 * s1) - 1.0);
  const double rel = std::sqrt(cv2 / t);
  const double log_mean = m + std::log(s1) - std::log(t) - log_vol;
  return RecipVariance{rel, rel > 0.0 ? log_mean + std::log(rel) : kNegInf};
}

/// 1 / (1 - phi)^2 clamped to [1, 1e6], phi the lag-1 autocorrelation of the
/// raw-scale series exp(log_series); -inf entries are zeros. A constant series gives 1.
inline double ar1_inflation(std::span<const double> log_series) {
  require(log_series.size() >= 10, ErrorKind::InvalidInput,
          "ar1_inflation needs a series of length >= 10");
  double m = kNegInf;
  for (double x : log_series) {
    require(!std::isnan(x) && x != kPosInf, ErrorKind::InvalidInput, "series entry is NaN or +inf");
    m = std::max(m, x);
  }
  if (m == kNegInf) return 1.0;
  std::vector<double> y(log_series.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::exp(log_series[i] - m);
    mean += y[i];
  }
  mean /= static_cast<double>(y.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double a = y[i] - mean;
    den += a * a;
    if (i + 1 < y.size()) num += a * (y[i + 1] - mean);
  }
  if (!(den > 0.0)) return 1.0;
  const double phi = num / den;
  if (phi >= 1.0) return 1e6;
  const double factor = 1.0 / ((1.0 - phi) * (1.0 - phi));
  return std::clamp(factor, 1.0, 1e6);
}

/// Normal interval on the 1/Z scale, 1/Z-hat * (1 -/+ z se), mapped to log Z by
/// reciprocating the endpoints. A non-positive lower 1/Z endpoint leaves the
/// log Z interval unbounded above.
inline Interval confidence_interval(double log_recip_z, double se_recip_rel, double level) {
  require(se_recip_rel >= 0.0, ErrorKind::InvalidInput, "standard error must be >= 0");
  require(level > 0.0 && level < 1.0, ErrorKind::InvalidInput, "ci level must be in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  const double half = z * se_recip_rel;
  const double log_z = -log_recip_z;
  const double lower = log_z - std::log1p(half);
  const double upper = half < 1.0 ? log_z - std::log1p(-half) : kPosInf;
  return Interval{lower, upper};
}

/// Classical harmonic mean of the likelihoods: log T - logsumexp(-log L).
inline double harmonic_mean_log_z(std::span<const double> log_likelihoods) {
  require(!log_likelihoods.empty(), ErrorKind::InvalidInput, "harmonic mean of an empty sample");
  std::vector<double> neg(log_likelihoods.size());
  for (std::size_t i = 0; i < neg.size(); ++i) {
    require(std::isfinite(log_likelihoods[i]), ErrorKind::InvalidInput,
            "harmonic mean needs finite log likelihoods");
    neg[i] = -log_likelihoods[i];
  }
  return std::log(static_cast<double>(neg.size())) - log_sum_exp(neg);
}

// ---------------------------------------------------------------------------
// estimator

namespace detail {

struct Partition {
  Ellipsoid shape;  // radius is a placeholder until resolved
  DrawMatrix draws;
  LogDensityVector log_post;
};

inline Partition partition(const DrawMatrix& draws, const LogDensityVector& log_post,
                           const ThamesOptions& opts) {
  check_draws(draws, 2);
  check_log_density(log_post, draws.rows());
  require(opts.ci_level > 0.0 && opts.ci_level < 1.0, ErrorKind::InvalidInput,
          "ci level must be in (0, 1)");
  if (opts.oracle) {
    return Partition{Ellipsoid::from_covariance(opts.oracle->mean, opts.oracle->covariance, 1.0),
                     draws, log_post};
  }
  if (!opts.split) {
    return Partition{Ellipsoid::fit(draws, 1.0, opts.ridge), draws, log_post};
  }
  require(opts.split_fraction > 0.0 && opts.split_fraction < 1.0, ErrorKind::InvalidInput,
          "split fraction must be in (0, 1)");
  const auto total = draws.rows();
  const auto n_fit = static_cast<Eigen::Index>(std::floor(opts.split_fraction * static_cast<double>(total)));
  const auto n_est = total - n_fit;
  require(n_fit >= 2 && n_est >= 2, ErrorKind::InvalidInput,
          "sample splitting needs at least 2 draws in each part");
  return Partition{Ellipsoid::fit(draws.topRows(n_fit), 1.0, opts.ridge), draws.bottomRows(n_est),
                   log_post.tail(n_est)};
}

/// Per-draw log reciprocal terms for the estimation draws: -log_post inside A, -inf outside.
inline std::vector<double> log_reciprocal_terms(const Partition& part, double radius) {
  const Ellipsoid e = part.shape.with_radius(radius);
  const Vector m2 = mahalanobis_sq_rows(part.draws, e);
  const double c2 = radius * radius;
  std::vector<double> terms(static_cast<std::size_t>(part.draws.rows()), kNegInf);
  for (Eigen::Index t = 0; t < part.draws.rows(); ++t) {
    if (m2[t] < c2) {
      if (part.log_post[t] == kNegInf) {
        fail(ErrorKind::DegenerateTerm, "draw " + std::to_string(t) +
                                            " has zero posterior density inside the truncation set");
      }
      terms[static_cast<std::size_t>(t)] = -part.log_post[t];
    }
  }
  return terms;
}

inline ThamesResult evaluate(const Partition& part, double radius, const ThamesOptions& opts) {
  const Ellipsoid e = part.shape.with_radius(radius);
  const std::vector<double> all_terms = log_reciprocal_terms(part, radius);
  std::vector<double> included;
  for (double x : all_terms) {
    if (x != kNegInf) included.push_back(x);
  }
  if (included.empty()) {
    fail(ErrorKind::EmptyTruncationSet, "no draw fell inside the truncation ellipsoid (c = " +
                                            std::to_string(radius) + ")");
  }
  const std::size_t t_est = all_terms.size();
  const double log_vol = log_volume(e);
  const double log_recip = log_sum_exp(included) - std::log(static_cast<double>(t_est)) - log_vol;

  RecipVariance var = variance_recip_iid(included, t_est, log_vol);
  double factor = 1.0;
  if (std::holds_alternative<serial::AR1>(opts.serial_correction)) {
    factor = ar1_inflation(all_terms);
  } else if (const auto* user = std::get_if<serial::UserFactor>(&opts.serial_correction)) {
    require(user->factor >= 1.0 && std::isfinite(user->factor), ErrorKind::InvalidInput,
            "serial correction factor must be >= 1");
    factor = user->factor;
  }
  const double se_rel = var.se_recip_rel * std::sqrt(factor);

  return ThamesResult{log_recip,
                      -log_recip,
                      se_rel,
                      confidence_interval(log_recip, se_rel, opts.ci_level),
                      t_est,
                      included.size(),
                      radius,
                      std::nullopt,
                      std::nullopt,
                      factor,
                      e};
}

}  // namespace detail

struct GridEntry {
  double c;
  std::optional<double> log_z;
  std::optional<double> se_recip_rel;
  std::optional<ErrorKind> error;
};

struct GridTuning {
  double c_best;
  std::vector<GridEntry> table;
};

namespace detail {

inline GridTuning tune(const Partition& part, const std::vector<double>& grid,
                       const ThamesOptions& opts) {
  require(!grid.empty(), ErrorKind::InvalidInput, "radius grid is empty");
  GridTuning out{0.0, {}};
  std::optional<double> best_var;
  for (double c : grid) {
    require(std::isfinite(c) && c > 0.0, ErrorKind::InvalidInput, "grid radii must be positive");
    GridEntry entry{c, std::nullopt, std::nullopt, std::nullopt};
    try {
      const ThamesResult r = evaluate(part, c, opts);
      entry.log_z = r.log_z;
      entry.se_recip_rel = r.se_recip_rel;
      const double var = r.se_recip_rel * r.se_recip_rel;
      if (!best_var || var < *best_var || (var == *best_var && c < out.c_best)) {
        best_var = var;
        out.c_best = c;
      }
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::EmptyTruncationSet && err.kind() != ErrorKind::InsufficientData) {
        throw;
      }
      entry.error = err.kind();
    }
    out.table.push_back(entry);
  }
  if (!best_var) fail(ErrorKind::EmptyTruncationSet, "every grid radius left the truncation set empty");
  return out;
}

}  // namespace detail

/// Evaluates the estimator at every grid radius with one shared ellipsoid shape
/// and returns the radius with the smallest estimated relative variance of 1/Z-hat
/// (ties go to the smaller radius).
inline GridTuning tune_radius_grid(const DrawMatrix& draws, const LogDensityVector& log_post,
                                   const std::vector<double>& grid, const ThamesOptions& opts = {}) {
  return detail::tune(detail::partition(draws, log_post, opts), grid, opts);
}

inline ThamesResult estimate(const DrawMatrix& draws, const LogDensityVector& log_post,
                           const ThamesOptions& opts = {}) {
  validate(opts.radius_policy);
  const detail::Partition part = detail::partition(draws, log_post, opts);
  const int d = static_cast<int>(draws.cols());

  double radius = 0.0;
  if (const auto* grid = std::get_if<radius_policy::EmpiricalGrid>(&opts.radius_policy)) {
    radius = detail::tune(part, grid->grid, opts).c_best;
  } else {
    radius = *resolve_radius(opts.radius_policy, d);
  }

  ThamesResult result = detail::evaluate(part, radius, opts);
  if (opts.correction) {
    const auto& cfg = *opts.correction;
    const VolumeRatio ratio =
        estimate_volume_ratio(result.ellipsoid, cfg.support, cfg.n_samples, cfg.seed, cfg.ci_level);
    result = apply_correction(std::move(result), ratio.r_hat);
    result.correction_ci = ratio.ci;
  }
  return result;
}

/// Plug-in SCV at radius c: t_estimation * se_recip_rel^2 (no serial inflation).
inline double empirical_scv(const DrawMatrix& draws, const LogDensityVector& log_post, double c,
                            ThamesOptions opts = {}) {
  opts.radius_policy = radius_policy::Fixed{c};
  opts.serial_correction = serial::None{};
  opts.correction.reset();
  const ThamesResult r = estimate(draws, log_post, opts);
  return static_cast<double>(r.t_estimation) * r.se_recip_rel * r.se_recip_rel;
}

// ---------------------------------------------------------------------------
// running estimates (convergence traces)

/// log 1/Z-hat after each of the first t = 1..T draws with a fixed ellipsoid;
/// -inf until the first draw lands inside A.
inline std::vector<double> running_log_recip_z(const Ellipsoid& e, const DrawMatrix& draws,
                                               const LogDensityVector& log_post) {
  require(draws.cols() == e.dim(), ErrorKind::InvalidInput, "running estimate: dimension mismatch");
  check_log_density(log_post, draws.rows());
  const Vector m2 = mahalanobis_sq_rows(draws, e);
  const double c2 = e.radius() * e.radius();
  const double log_vol = log_volume(e);
  std::vector<double> out(static_cast<std::size_t>(draws.rows()));
  double log_sum = kNegInf;
  for (Eigen::Index t = 0; t < draws.rows(); ++t) {
    if (m2[t] < c2) {
      if (log_post[t] == kNegInf) fail(ErrorKind::DegenerateTerm, "zero-density draw inside A");
      log_sum = log_add(log_sum, -log_post[t]);
    }
    out[static_cast<std::size_t>(t)] = log_sum - std::log(static_cast<double>(t + 1)) - log_vol;
  }
  return out;
}

/// Running harmonic-mean estimate of log Z after each of the first t draws.
inline std::vector<double> running_harmonic_mean_log_z(std::span<const double> log_likelihoods) {
  std::vector<double> out(log_likelihoods.size());
  double log_sum = kNegInf;
  for (std::size_t t = 0; t < log_likelihoods.size(); ++t) {
    require(std::isfinite(log_likelihoods[t]), ErrorKind::InvalidInput,
            "harmonic mean needs finite log likelihoods");
    log_sum = log_add(log_sum, -log_likelihoods[t]);
    out[t] = std::log(static_cast<double>(t + 1)) - log_sum;
  }
  return out;
}

}  // namespace thames
