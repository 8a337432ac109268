#pragma once

// Linear-algebra helpers, ellipsoid geometry and log-space arithmetic shared by
// every other part of the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "thames/error.hpp"

namespace thames {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// T x d posterior draws, one row per draw.
using DrawMatrix = Eigen::MatrixXd;
/// Per-draw log L(theta) + log pi(theta); -inf marks a zero-density draw.
using LogDensityVector = Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kRidgeEpsilon = 1e-8;

// ---------------------------------------------------------------------------
// log-space arithmetic

/// log(sum(exp(x))) with max shift. Empty input or all -inf gives -inf.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (m == kPosInf) return kPosInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_sum_exp(const Eigen::VectorXd& xs) {
  return log_sum_exp(std::span<const double>(xs.data(), static_cast<std::size_t>(xs.size())));
}

inline double log_gamma(double x) { return std::lgamma(x); }

// ---------------------------------------------------------------------------
// validation

inline void check_draws(const DrawMatrix& draws, std::size_t min_rows = 1) {
  require(draws.cols() >= 1, ErrorKind::InvalidInput, "draw matrix has no columns");
  require(static_cast<std::size_t>(draws.rows()) >= min_rows, ErrorKind::InvalidInput,
          "draw matrix needs at least " + std::to_string(min_rows) + " rows, got " +
              std::to_string(draws.rows()));
  require(draws.allFinite(), ErrorKind::InvalidInput, "draw matrix contains non-finite entries");
}

inline void check_log_density(const LogDensityVector& log_post, Eigen::Index expected_len) {
  require(log_post.size() == expected_len, ErrorKind::InvalidInput,
          "log density length " + std::to_string(log_post.size()) + " does not match " +
              std::to_string(expected_len) + " draws");
  for (Eigen::Index i = 0; i < log_post.size(); ++i) {
    const double v = log_post[i];
    require(!std::isnan(v) && v != kPosInf, ErrorKind::InvalidInput,
            "log density entry " + std::to_string(i) + " is NaN or +inf");
  }
}

// ---------------------------------------------------------------------------
// moments

inline Vector sample_mean(const DrawMatrix& draws) {
  require(draws.rows() >= 1 && draws.cols() >= 1, ErrorKind::InvalidInput,
          "sample_mean of an empty matrix");
  return draws.colwise().mean().transpose();
}

/// Unbiased sample covariance (divisor T - 1).
inline Matrix sample_covariance(const DrawMatrix& draws) {
  require(draws.rows() >= 2, ErrorKind::InvalidInput,
          "sample_covariance needs at least 2 draws");
  const Vector mean = sample_mean(draws);
  const Matrix centered = draws.rowwise() - mean.transpose();
  Matrix cov = Matrix::Zero(draws.cols(), draws.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(draws.rows() - 1);
  return cov;
}

// ---------------------------------------------------------------------------
// Cholesky

/// Lower-triangular Lo with Lo * Lo^T = sigma. The input is symmetrized first;
/// asymmetry beyond 1e-10 (relative to the largest entry) is rejected.
///
/// With `ridge` set, a failed factorization is retried once on
/// sigma + 1e-8 * mean(diag(sigma)) * I.
inline Matrix cholesky_factor(const Matrix& sigma, bool ridge = false) {
  require(sigma.rows() == sigma.cols() && sigma.rows() >= 1, ErrorKind::InvalidInput,
          "cholesky_factor needs a non-empty square matrix");
  require(sigma.allFinite(), ErrorKind::InvalidInput, "matrix has non-finite entries");
  const double scale = sigma.cwiseAbs().maxCoeff();
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kSymmetryTolerance * std::max(scale, std::numeric_limits<double>::min()),
          ErrorKind::InvalidInput, "matrix is not symmetric");
  Matrix sym = 0.5 * (sigma + sigma.transpose());

  const auto factor = [](const Matrix& s, Matrix& out) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) return false;
    out = llt.matrixL();
    const double max_diag = s.diagonal().cwiseAbs().maxCoeff();
    const double floor = static_cast<double>(s.rows()) * std::numeric_limits<double>::epsilon() *
                         std::sqrt(max_diag);
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
      if (!(out(j, j) > floor)) return false;
    }
    return true;
  };

  Matrix lower;
  if (factor(sym, lower)) return lower;
  if (ridge) {
    const double bump = kRidgeEpsilon * sym.diagonal().mean();
    if (bump > 0.0) {
      sym.diagonal().array() += bump;
      if (factor(sym, lower)) return lower;
    }
  }
  fail(ErrorKind::NotPositiveDefinite, "covariance matrix is not positive definite");
}

// ---------------------------------------------------------------------------
// Ellipsoid

/// The truncation set {theta : (theta - center)^T Sigma^-1 (theta - center) < c^2},
/// stored through the Cholesky factor of Sigma.
class Ellipsoid {
 public:
  Ellipsoid(Vector center, Matrix scale, double radius)
      : center_(std::move(center)), scale_(std::move(scale)), radius_(radius) {
    require(scale_.rows() == scale_.cols() && scale_.rows() == center_.size() && center_.size() >= 1,
            ErrorKind::InvalidInput, "ellipsoid center/scale dimensions disagree");
    require(std::isfinite(radius_) && radius_ > 0.0, ErrorKind::InvalidInput,
            "ellipsoid radius must be finite and positive");
    require(center_.allFinite() && scale_.allFinite(), ErrorKind::InvalidInput,
            "ellipsoid has non-finite entries");
    log_det_sigma_ = 0.0;
    for (Eigen::Index j = 0; j < scale_.rows(); ++j) {
      require(scale_(j, j) > 0.0, ErrorKind::NotPositiveDefinite,
              "scale factor must have a positive diagonal");
      log_det_sigma_ += 2.0 * std::log(scale_(j, j));
    }
    scale_ = scale_.triangularView<Eigen::Lower>();
  }

  static Ellipsoid from_covariance(Vector center, const Matrix& sigma, double radius,
                                   bool ridge = false) {
    return Ellipsoid(std::move(center), cholesky_factor(sigma, ridge), radius);
  }

  /// Center = sample mean, Sigma = unbiased sample covariance of `draws`.
  static Ellipsoid fit(const DrawMatrix& draws, double radius, bool ridge = false) {
    check_draws(draws, 2);
    return from_covariance(sample_mean(draws), sample_covariance(draws), radius, ridge);
  }

  Ellipsoid with_radius(double radius) const { return Ellipsoid(center_, scale_, radius); }

  Eigen::Index dim() const noexcept { return center_.size(); }
  const Vector& center() const noexcept { return center_; }
  const Matrix& scale() const noexcept { return scale_; }
  double radius() const noexcept { return radius_; }
  double log_det_sigma() const noexcept { return log_det_sigma_; }

 private:
  Vector center_;
  Matrix scale_;
  double radius_;
  double log_det_sigma_ = 0.0;
};

/// (theta - center)^T Sigma^-1 (theta - center), via one triangular solve.
inline double mahalanobis_sq(const Vector& theta, const Ellipsoid& e) {
  require(theta.size() == e.dim(), ErrorKind::InvalidInput,
          "mahalanobis_sq: dimension mismatch");
  const Vector z = e.scale().triangularView<Eigen::Lower>().solve(theta - e.center());
  return z.squaredNorm();
}

/// log V(A) = d log c + (d/2) log pi + (1/2) log|Sigma| - lgamma(d/2 + 1).
inline double log_volume(const Ellipsoid& e) {
  const double d = static_cast<double>(e.dim());
  return d * std::log(e.radius()) + 0.5 * d * std::log(std::numbers::pi) +
         0.5 * e.log_det_sigma() - log_gamma(0.5 * d + 1.0);
}

/// Row t becomes Lo^-1 (theta_t - center).
inline DrawMatrix standardize(const DrawMatrix& draws, const Ellipsoid& e) {
  require(draws.cols() == e.dim(), ErrorKind::InvalidInput, "standardize: dimension mismatch");
  const Matrix centered = (draws.rowwise() - e.center().transpose()).transpose();
  return e.scale().triangularView<Eigen::Lower>().solve(centered).transpose();
}

/// Inverse of standardize: theta = Lo * z + center.
inline DrawMatrix unstandardize(const DrawMatrix& standardized, const Ellipsoid& e) {
  require(standardized.cols() == e.dim(), ErrorKind::InvalidInput,
          "unstandardize: dimension mismatch");
  Matrix out = (e.scale().triangularView<Eigen::Lower>() * standardized.transpose()).transpose();
  out.rowwise() += e.center().transpose();
  return out;
}

/// Squared Mahalanobis distance of every row, computed in one batched solve.
inline Vector mahalanobis_sq_rows(const DrawMatrix& draws, const Ellipsoid& e) {
  return standardize(draws, e).rowwise().squaredNorm();
}

}  // namespace thames
