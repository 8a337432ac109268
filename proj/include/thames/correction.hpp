#pragma once

// Volume-ratio correction for posteriors whose support is smaller than R^d:
// when the truncation ellipsoid A sticks out of the support, the uncorrected
// estimate of 1/Z is scaled by R = V(A ∩ support) / V(A). R is estimated by
// uniform Monte Carlo inside A and divided out.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "thames/core.hpp"
#include "thames/error.hpp"
#include "thames/result.hpp"
#include "thames/rng.hpp"

namespace thames {

namespace support {
struct Unbounded {};
/// theta[i] > 0 for every listed index.
struct PositiveOrthant {
  std::vector<std::size_t> indices;
};
/// lower[i] < theta[i] < upper[i]; infinite bounds allowed.
struct Box {
  Vector lower;
  Vector upper;
};
/// Listed entries positive with sum < 1.
struct Simplex {
  std::vector<std::size_t> indices;
};
struct Callback {
  std::function<bool(const Vector&)> contains;
};
}  // namespace support

using SupportPredicate = std::variant<support::Unbounded, support::PositiveOrthant, support::Box,
                                      support::Simplex, support::Callback>;

inline SupportPredicate simplex_support(std::size_t d) {
  support::Simplex s;
  s.indices.resize(d);
  for (std::size_t i = 0; i < d; ++i) s.indices[i] = i;
  return s;
}

inline void validate(const SupportPredicate& predicate, Eigen::Index d) {
  const auto check_indices = [d](const std::vector<std::size_t>& idx) {
    for (std::size_t i : idx) {
      require(static_cast<Eigen::Index>(i) < d, ErrorKind::InvalidInput,
              "support index " + std::to_string(i) + " out of range for dimension " + std::to_string(d));
    }
  };
  if (const auto* p = std::get_if<support::PositiveOrthant>(&predicate)) {
    check_indices(p->indices);
  } else if (const auto* s = std::get_if<support::Simplex>(&predicate)) {
    check_indices(s->indices);
  } else if (const auto* b = std::get_if<support::Box>(&predicate)) {
    require(b->lower.size() == d && b->upper.size() == d, ErrorKind::InvalidInput,
            "box support dimension mismatch");
    for (Eigen::Index i = 0; i < d; ++i) {
      require(b->lower[i] < b->upper[i], ErrorKind::InvalidInput,
              "box support needs lower < upper in every coordinate");
    }
  } else if (const auto* c = std::get_if<support::Callback>(&predicate)) {
    require(static_cast<bool>(c->contains), ErrorKind::InvalidInput, "empty support callback");
  }
}

inline bool contains(const SupportPredicate& predicate, const Vector& theta) {
  return std::visit(
      [&theta](const auto& p) -> bool {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, support::Unbounded>) {
          return true;
        } else if constexpr (std::is_same_v<P, support::PositiveOrthant>) {
          for (std::size_t i : p.indices) {
            if (!(theta[static_cast<Eigen::Index>(i)] > 0.0)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<P, support::Box>) {
          return (theta.array() > p.lower.array()).all() && (theta.array() < p.upper.array()).all();
        } else if constexpr (std::is_same_v<P, support::Simplex>) {
          double sum = 0.0;
          for (std::size_t i : p.indices) {
            const double v = theta[static_cast<Eigen::Index>(i)];
            if (!(v > 0.0)) return false;
            sum += v;
          }
          return sum < 1.0;
        } else {
          return p.contains(theta);
        }
      },
      predicate);
}

struct ConstrainedCorrectionConfig {
  std::size_t n_samples = 100;
  SupportPredicate support = support::Unbounded{};
  std::uint64_t seed = 0;
  double ci_level = 0.95;
};

/// n points uniform in the ellipsoid: center + Lo * (c * u^(1/d) * s), with s a
/// normalized standard Gaussian vector and u ~ U(0, 1). Deterministic in `seed`.
inline DrawMatrix sample_uniform_ellipsoid(const Ellipsoid& e, std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidInput, "sample_uniform_ellipsoid: n must be >= 1");
  const Eigen::Index d = e.dim();
  CounterRng rng(seed);
  std::normal_distribution<double> normal;
  Matrix unit(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    Vector s(d);
    double norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < d; ++j) s[j] = normal(rng);
      norm = s.norm();
    } while (!(norm > 0.0));
    const double r = e.radius() * std::pow(uniform_open01(rng), 1.0 / static_cast<double>(d));
    unit.row(i) = (r / norm) * s.transpose();
  }
  return unstandardize(unit, e);
}

struct VolumeRatio {
  double r_hat;
  Interval ci;
  std::size_t n;
};

/// Fraction of uniform ellipsoid points inside the support, with a normal
/// approximation interval clipped to [0, 1].
inline VolumeRatio estimate_volume_ratio(const Ellipsoid& e, const SupportPredicate& predicate,
                                         std::size_t n, std::uint64_t seed, double ci_level = 0.95) {
  require(n >= 1, ErrorKind::InvalidInput, "estimate_volume_ratio: n must be >= 1");
  require(ci_level > 0.0 && ci_level < 1.0, ErrorKind::InvalidInput, "ci level must be in (0, 1)");
  validate(predicate, e.dim());

  VolumeRatio out{1.0, {1.0, 1.0}, n};
  if (!std::holds_alternative<support::Unbounded>(predicate)) {
    const DrawMatrix nu = sample_uniform_ellipsoid(e, n, seed);
    std::size_t inside = 0;
    for (Eigen::Index i = 0; i < nu.rows(); ++i) {
      if (contains(predicate, nu.row(i).transpose())) ++inside;
    }
    const double r = static_cast<double>(inside) / static_cast<double>(n);
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * ci_level);
    const double half = z * std::sqrt(r * (1.0 - r) / static_cast<double>(n));
    out.r_hat = r;
    out.ci = {std::max(0.0, r - half), std::min(1.0, r + half)};
  }
  if (out.r_hat <= 0.0) {
    fail(ErrorKind::ZeroSupportOverlap,
         "no uniform ellipsoid sample fell inside the support (N = " + std::to_string(n) +
             ", upper CI bound " + std::to_string(out.ci.upper) + ")");
  }
  return out;
}

/// Divides 1/Z-hat by r_hat: log 1/Z drops by log r_hat, log Z (and its interval) rises by it.
inline ThamesResult apply_correction(ThamesResult result, double r_hat) {
  if (!(r_hat > 0.0)) fail(ErrorKind::ZeroSupportOverlap, "volume ratio must be positive");
  require(r_hat <= 1.0, ErrorKind::InvalidInput, "volume ratio cannot exceed 1");
  const double shift = std::log(r_hat);
  result.log_recip_z -= shift;
  result.log_z += shift;
  result.ci_log_z.lower += shift;
  result.ci_log_z.upper += shift;
  result.correction_ratio = r_hat;
  return result;
}

}  // namespace thames
