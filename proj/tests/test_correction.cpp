#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "thames/correction.hpp"
#include "thames/estimator.hpp"
#include "thames/models/dirmult.hpp"

using thames::ErrorKind;
using thames::Matrix;
using thames::Vector;
namespace sp = thames::support;
namespace mdl = thames::models;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const thames::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no thames::Error thrown";
  return ErrorKind::NumericalFailure;
}

thames::Ellipsoid ball(Eigen::Index d, double radius, double center = 0.0) {
  return thames::Ellipsoid(Vector::Constant(d, center), Matrix::Identity(d, d), radius);
}

}  // namespace

TEST(UniformEllipsoid, PointsLieInside) {
  Matrix sigma(3, 3);
  sigma << 2, 0.5, 0, 0.5, 1, 0.3, 0, 0.3, 4;
  const auto e = thames::Ellipsoid::from_covariance(Vector::Ones(3), sigma, 1.5);
  const auto pts = thames::sample_uniform_ellipsoid(e, 2000, 1);
  EXPECT_LT(thames::mahalanobis_sq_rows(pts, e).maxCoeff(), 1.5 * 1.5);
}

TEST(UniformEllipsoid, MomentsOfUnitInterval) {
  // Uniform on (-1, 1): mean 0, variance 1/3.
  const auto pts = thames::sample_uniform_ellipsoid(ball(1, 1.0), 10000, 2);
  EXPECT_NEAR(pts.col(0).mean(), 0.0, 0.03);
  EXPECT_NEAR(pts.col(0).squaredNorm() / 10000.0, 1.0 / 3.0, 0.02);
}

TEST(UniformEllipsoid, RadialFractionInTwoDimensions) {
  // Area inside radius 1/sqrt(2) of the unit disk is exactly one half.
  const auto pts = thames::sample_uniform_ellipsoid(ball(2, 1.0), 20000, 3);
  const double frac = (pts.rowwise().norm().array() < 1.0 / std::sqrt(2.0)).cast<double>().mean();
  EXPECT_NEAR(frac, 0.5, 0.015);
}

TEST(UniformEllipsoid, Deterministic) {
  const auto e = ball(4, 2.0);
  EXPECT_EQ(thames::sample_uniform_ellipsoid(e, 50, 9), thames::sample_uniform_ellipsoid(e, 50, 9));
  EXPECT_NE(thames::sample_uniform_ellipsoid(e, 50, 9), thames::sample_uniform_ellipsoid(e, 50, 10));
}

TEST(VolumeRatio, UnboundedIsOne) {
  const auto r = thames::estimate_volume_ratio(ball(3, 1.0), sp::Unbounded{}, 10, 4);
  EXPECT_EQ(r.r_hat, 1.0);
  EXPECT_EQ(r.ci.lower, 1.0);
  EXPECT_EQ(r.ci.upper, 1.0);
}

TEST(VolumeRatio, HalfSpaceThroughCenter) {
  const auto r = thames::estimate_volume_ratio(ball(3, 1.0), sp::PositiveOrthant{{0}}, 20000, 5);
  EXPECT_NEAR(r.r_hat, 0.5, 0.015);
  EXPECT_LE(r.ci.lower, r.r_hat);
  EXPECT_GE(r.ci.upper, r.r_hat);
}

TEST(VolumeRatio, BoxContainingEllipsoidIsOne) {
  sp::Box box{Vector::Constant(2, -5.0), Vector::Constant(2, 5.0)};
  EXPECT_EQ(thames::estimate_volume_ratio(ball(2, 1.0), box, 500, 6).r_hat, 1.0);
}

TEST(VolumeRatio, MatchesGridOracleOnSimplexCorner) {
  const double cx = 0.1;
  const double cy = 0.2;
  const double radius = 0.25;
  const double expected = oracle::disk_simplex_ratio(cx, cy, radius);
  const thames::Ellipsoid e((Vector(2) << cx, cy).finished(), Matrix::Identity(2, 2), radius);
  const auto r = thames::estimate_volume_ratio(e, thames::simplex_support(2), 40000, 7);
  EXPECT_NEAR(r.r_hat, expected, 4.0 * std::sqrt(expected * (1 - expected) / 40000.0));
}

TEST(VolumeRatio, UnbiasedAcrossSeeds) {
  const double expected = oracle::disk_simplex_ratio(0.1, 0.2, 0.25);
  const thames::Ellipsoid e((Vector(2) << 0.1, 0.2).finished(), Matrix::Identity(2, 2), 0.25);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    total += thames::estimate_volume_ratio(e, thames::simplex_support(2), 100, thames::stream_seed(8, s)).r_hat;
  }
  const double se = std::sqrt(expected * (1 - expected) / 100000.0);
  EXPECT_NEAR(total / 1000.0, expected, 4.0 * se);
}

TEST(VolumeRatio, DisjointSupportFails) {
  sp::Box far{Vector::Constant(1, 10.0), Vector::Constant(1, 11.0)};
  EXPECT_EQ(kind_of([&] { thames::estimate_volume_ratio(ball(1, 1.0), far, 100, 9); }),
            ErrorKind::ZeroSupportOverlap);
}

TEST(VolumeRatio, CallbackSupport) {
  sp::Callback cb{[](const Vector& v) { return v[0] + v[1] > 0.0; }};
  EXPECT_NEAR(thames::estimate_volume_ratio(ball(2, 1.0), cb, 20000, 10).r_hat, 0.5, 0.015);
}

TEST(SupportValidation, RejectsBadPredicates) {
  EXPECT_EQ(kind_of([] { thames::validate(thames::SupportPredicate{sp::PositiveOrthant{{3}}}, 3); }),
            ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::validate(thames::SupportPredicate{sp::Simplex{{0, 5}}}, 2); }),
            ErrorKind::InvalidInput);
  sp::Box inverted{Vector::Constant(2, 1.0), Vector::Constant(2, 0.0)};
  EXPECT_EQ(kind_of([&] { thames::validate(thames::SupportPredicate{inverted}, 2); }), ErrorKind::InvalidInput);
  sp::Box wrong_dim{Vector::Zero(1), Vector::Ones(1)};
  EXPECT_EQ(kind_of([&] { thames::validate(thames::SupportPredicate{wrong_dim}, 2); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::validate(thames::SupportPredicate{sp::Callback{}}, 2); }),
            ErrorKind::InvalidInput);
}

TEST(Contains, StrictBoundaries) {
  const auto simplex = thames::simplex_support(2);
  EXPECT_TRUE(thames::contains(simplex, (Vector(2) << 0.3, 0.3).finished()));
  EXPECT_FALSE(thames::contains(simplex, (Vector(2) << 0.0, 0.3).finished()));
  EXPECT_FALSE(thames::contains(simplex, (Vector(2) << 0.5, 0.5).finished()));
  EXPECT_FALSE(thames::contains(sp::PositiveOrthant{{1}}, (Vector(2) << 1.0, -0.1).finished()));
}

namespace {

thames::ThamesResult fake_result(double log_recip_z) {
  return thames::ThamesResult{log_recip_z, -log_recip_z, 0.1, {-log_recip_z - 0.1, -log_recip_z + 0.1},
                              100, 80, 1.0, std::nullopt, std::nullopt, 1.0, ball(1, 1.0)};
}

}  // namespace

TEST(ApplyCorrection, Examples) {
  const auto half = thames::apply_correction(fake_result(2.0), 0.5);
  EXPECT_NEAR(half.log_recip_z, 2.0 + std::log(2.0), 1e-15);
  EXPECT_NEAR(half.log_z, -2.0 - std::log(2.0), 1e-15);
  EXPECT_NEAR(half.ci_log_z.lower, -2.1 - std::log(2.0), 1e-15);
  EXPECT_EQ(*half.correction_ratio, 0.5);
  EXPECT_EQ(half.se_recip_rel, 0.1);
  EXPECT_EQ(thames::apply_correction(fake_result(2.0), 1.0).log_z, -2.0);
  EXPECT_EQ(kind_of([] { thames::apply_correction(fake_result(2.0), 0.0); }), ErrorKind::ZeroSupportOverlap);
  EXPECT_EQ(kind_of([] { thames::apply_correction(fake_result(2.0), 1.5); }), ErrorKind::InvalidInput);
}

TEST(ApplyCorrection, ThroughEstimatorOptionsIsDeterministic) {
  // No counts in the first category: mu_1 piles up against 0.
  mdl::DirMultModel m{3, 20, 1.0, mdl::CountMatrix::Zero(5, 3)};
  m.counts.rightCols(2).setConstant(10);
  const auto draws = mdl::dirmult_posterior_sample(m, 2000, 12);
  const auto lp = mdl::dirmult_log_post(m, draws);
  thames::ThamesOptions opts;
  opts.correction = thames::ConstrainedCorrectionConfig{200, mdl::dirmult_support(m), 13, 0.95};
  const auto a = thames::estimate(draws, lp, opts);
  const auto b = thames::estimate(draws, lp, opts);
  EXPECT_EQ(a.log_z, b.log_z);
  ASSERT_TRUE(a.correction_ratio.has_value());
  EXPECT_LT(*a.correction_ratio, 1.0);
  ASSERT_TRUE(a.correction_ci.has_value());
  EXPECT_LE(a.correction_ci->lower, *a.correction_ratio);
}

TEST(ApplyCorrection, RemovesBiasNearSupportBoundary) {
  // A posterior piled up near mu_1 = 0: the ellipsoid spills over the boundary
  // and the uncorrected estimate of log Z is biased upward.
  double err_raw = 0.0;
  double err_corrected = 0.0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    mdl::DirMultModel m{2, 5, 1.0, mdl::CountMatrix::Zero(3, 2)};
    m.counts.col(1).setConstant(5);
    const double exact = mdl::dirmult_log_marginal_closed_form(m);
    const auto draws = mdl::dirmult_posterior_sample(m, 5000, thames::stream_seed(14, rep));
    const auto lp = mdl::dirmult_log_post(m, draws);
    const auto raw = thames::estimate(draws, lp);
    thames::ThamesOptions opts;
    opts.correction = thames::ConstrainedCorrectionConfig{2000, mdl::dirmult_support(m), thames::stream_seed(15, rep)};
    const auto fixed = thames::estimate(draws, lp, opts);
    err_raw += raw.log_z - exact;
    err_corrected += fixed.log_z - exact;
  }
  EXPECT_GT(err_raw / reps, 0.1);
  EXPECT_LT(std::abs(err_corrected / reps), 0.05);
}
