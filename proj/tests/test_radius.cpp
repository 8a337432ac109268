#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "thames/radius.hpp"

using thames::ErrorKind;
namespace rp = thames::radius_policy;

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

}  // namespace

TEST(LogF, ClosedFormDimensionTwo) {
  EXPECT_NEAR(thames::log_f(2, 1.0), std::log(std::exp(0.5) - 1.0), 1e-12);
  for (double c : {0.3, 2.0, 7.0}) EXPECT_NEAR(thames::log_f(2, c), std::log(std::expm1(0.5 * c * c)), 1e-11);
}

TEST(LogF, DimensionOneMatchesErfiSeries) {
  for (double c : {0.5, 1.0, 2.0, 3.0}) {
    const double expected = c * std::sqrt(std::numbers::pi / 2.0) * oracle::erfi(c / std::sqrt(2.0));
    EXPECT_NEAR(std::exp(thames::log_f(1, c)) / expected, 1.0, 1e-10) << "c=" << c;
  }
}

TEST(LogF, Recursion) {
  for (int d = 3; d <= 30; ++d) {
    for (double c : {1.0, std::sqrt(d * 1.0), std::sqrt(d + 1.0)}) {
      const double rhs = std::exp(0.5 * c * c) - (d == 2 ? 1.0 : 0.0) -
                         (d - 2.0) * std::exp(thames::log_f(d - 2, c)) / (c * c);
      EXPECT_NEAR(std::exp(thames::log_f(d, c)) / rhs, 1.0, 1e-8) << "d=" << d << " c=" << c;
    }
  }
}

TEST(LogF, MatchesBruteForceQuadrature) {
  for (int d = 1; d <= 30; ++d) {
    const double rd = std::sqrt(d * 1.0);
    for (double c : {0.5, 1.0, rd, std::sqrt(d + 1.0), 2.0 * rd}) {
      EXPECT_NEAR(thames::log_f(d, c), oracle::log_f(d, c), 1e-8) << "d=" << d << " c=" << c;
    }
  }
}

TEST(LogF, LargeDimensionStaysFinite) {
  for (int d : {500, 2000}) {
    const double c2 = d + 1.0;
    const double v = thames::log_f(d, std::sqrt(c2));
    EXPECT_TRUE(std::isfinite(v));
    // Laplace at the endpoint: f ~ exp(c^2/2) c^2 / (c^2 + d - 1).
    EXPECT_NEAR(v, 0.5 * c2 + std::log(c2 / (c2 + d - 1.0)), 0.01);
  }
}

TEST(LogF, RejectsBadArguments) {
  EXPECT_EQ(kind_of([] { thames::log_f(2, 0.0); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::log_f(2, -1.0); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::log_f(0, 1.0); }), ErrorKind::InvalidInput);
}

TEST(ScvNormal, ClosedFormDimensionTwo) {
  EXPECT_NEAR(thames::scv_normal(2, std::sqrt(3.0)), 4.0 * (std::exp(1.5) - 1.0) / 9.0 - 1.0, 1e-12);
}

TEST(ScvNormal, DivergesAtBothEnds) {
  const double mid = thames::scv_normal(1, std::sqrt(2.0));
  EXPECT_GT(thames::scv_normal(1, 0.01), mid);
  EXPECT_GT(thames::scv_normal(1, 30.0), mid);
}

TEST(ScvNormal, MatchesOracle) {
  for (int d : {1, 3, 10, 25}) {
    const double c = std::sqrt(d + 1.0);
    EXPECT_NEAR(thames::scv_normal(d, c), oracle::scv(d, c), 1e-9 * (1.0 + oracle::scv(d, c)));
  }
}

TEST(ScvNormal, OverflowCarriesLogValue) {
  try {
    thames::scv_normal(1, 60.0);
    FAIL() << "expected overflow";
  } catch (const thames::OverflowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Overflow);
    EXPECT_GT(e.log_value(), 690.0);
  }
}

TEST(ScvNormal, DimensionHundredBetweenBounds) {
  const double v = thames::scv_normal(100, std::sqrt(101.0));
  const auto b = thames::scv_bounds(100);
  EXPECT_GT(v, b.lower);
  EXPECT_LT(v, b.upper);
}

TEST(OptimalRadius, ShiftThresholds) {
  EXPECT_LE(std::abs(thames::optimal_radius(10).L_d - 1.0), 0.05);
  EXPECT_LE(std::abs(thames::optimal_radius(100).L_d - 1.0), 0.005);
  const auto one = thames::optimal_radius(1);
  EXPECT_LE(std::abs(one.L_d - 1.0), 0.5);
  EXPECT_GE(one.c_d, 1.0);
}

TEST(OptimalRadius, AgreesWithDirectMinimization) {
  for (int d : {1, 2, 5, 12}) {
    const double c = oracle::argmin_scv(d, std::sqrt(d * 1.0), std::sqrt(d + 4.0));
    EXPECT_NEAR(thames::optimal_radius(d).c_d, c, 1e-6) << "d=" << d;
  }
}

TEST(OptimalRadius, MinimizesOnGrid) {
  for (int d = 1; d <= 50; ++d) {
    const auto opt = thames::optimal_radius(d);
    const double rd = std::sqrt(d * 1.0);
    for (int i = 0; i < 200; ++i) {
      const double c = 0.5 * rd + (1.5 * rd) * i / 199.0;
      EXPECT_LE(opt.scv_at_opt, thames::scv_normal(d, c) * (1.0 + 1e-12)) << "d=" << d << " c=" << c;
    }
    EXPECT_GE(opt.c_d, rd);
    EXPECT_GE(opt.L_d, 0.0);
    EXPECT_NEAR(opt.L_d, opt.c_d * opt.c_d - d, 1e-12 * d);
  }
}

TEST(OptimalRadius, ShiftApproachesOneMonotonically) {
  double prev = INFINITY;
  for (int d = 1; d <= 200; ++d) {
    const double dev = std::abs(thames::optimal_radius(d).L_d - 1.0);
    EXPECT_LE(dev, prev) << "d=" << d;
    prev = dev;
  }
}

TEST(ChiSquareMedian, Examples) {
  EXPECT_NEAR(thames::chi_square_median_radius(2), std::sqrt(2.0 * std::log(2.0)), 1e-10);
  const double c1 = thames::chi_square_median_radius(1);
  EXPECT_NEAR(oracle::regularized_gamma_p(0.5, 0.5 * c1 * c1), 0.5, 1e-10);
  EXPECT_NEAR(c1 * c1, 0.454936423119572, 1e-9);
}

TEST(ChiSquareMedian, PrintedApproximationWithinHalfPercent) {
  // The printed approximation d (1 - 2/(9d))^2 is compared with the quantile c^2.
  const double d = 100.0;
  const double approx = d * std::pow(1.0 - 2.0 / (9.0 * d), 2);
  const double c = thames::chi_square_median_radius(100);
  EXPECT_LE(std::abs(c * c / approx - 1.0), 0.005);
}

TEST(RegularizedGammaP, Examples) {
  EXPECT_EQ(thames::regularized_gamma_p(2.0, 0.0), 0.0);
  EXPECT_NEAR(thames::regularized_gamma_p(0.5, 40.0), 1.0, 1e-12);
  EXPECT_NEAR(thames::regularized_gamma_p(1.0, 1.0), 1.0 - std::exp(-1.0), 1e-12);
  for (double a : {0.5, 3.0, 25.0}) {
    for (double x : {0.1, 1.0, 10.0, 30.0}) {
      EXPECT_NEAR(thames::regularized_gamma_p(a, x), oracle::regularized_gamma_p(a, x), 1e-12);
    }
  }
  EXPECT_EQ(kind_of([] { thames::regularized_gamma_p(-1.0, 1.0); }), ErrorKind::InvalidInput);
}

TEST(ScvBounds, Formulas) {
  const auto b1 = thames::scv_bounds(1);
  EXPECT_DOUBLE_EQ(b1.lower, 0.63 * std::sqrt(3.0 * std::numbers::pi / 4.0) - 1.0);
  EXPECT_DOUBLE_EQ(b1.upper, 2.18 * std::sqrt(3.0 * std::numbers::pi / 4.0) - 1.0);
  const auto b2 = thames::scv_bounds(2);
  EXPECT_NEAR(b2.lower, 0.63 * std::sqrt(std::numbers::pi) - 1.0, 1e-15);
  EXPECT_NEAR(b2.upper, 2.18 * std::sqrt(std::numbers::pi) - 1.0, 1e-15);
  for (int d = 1; d <= 500; ++d) EXPECT_LT(thames::scv_bounds(d).lower, thames::scv_bounds(d).upper);
}

TEST(HeuristicRatio, AtLeastOneAndSmallByHundred) {
  double at100 = 0.0;
  for (int d = 1; d <= 100; ++d) {
    const double ratio = thames::scv_normal(d, thames::chi_square_median_radius(d)) /
                         thames::optimal_radius(d).scv_at_opt;
    EXPECT_GE(ratio, 1.0 - 1e-12) << "d=" << d;
    at100 = ratio;
  }
  EXPECT_LT(at100, 1.05);
}

TEST(ResolveRadius, Policies) {
  EXPECT_DOUBLE_EQ(*thames::resolve_radius(rp::SqrtDPlusOne{}, 2), std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(*thames::resolve_radius(rp::Fixed{0.1 * std::sqrt(3.0)}, 2), 0.1 * std::sqrt(3.0));
  const double c = *thames::resolve_radius(rp::OptimalNormal{}, 10);
  EXPECT_LE(std::abs(c * c - 10.0 - 1.0), 0.05);
  EXPECT_DOUBLE_EQ(*thames::resolve_radius(rp::ChiSquareMedian{}, 2), thames::chi_square_median_radius(2));
  EXPECT_FALSE(thames::resolve_radius(rp::EmpiricalGrid{{1.0, 2.0}}, 2).has_value());
}

TEST(RadiusPolicy, Validation) {
  EXPECT_EQ(kind_of([] { thames::validate(rp::Fixed{0.0}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::validate(rp::EmpiricalGrid{{}}); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::validate(rp::EmpiricalGrid{{1.0, -2.0}}); }), ErrorKind::InvalidInput);
}

TEST(RadiusPolicy, TextRoundTrip) {
  for (const char* text : {"sqrt_d_plus_1", "chisq_median", "optimal", "fixed:2", "grid:0.5,1.5,3"}) {
    const auto p = thames::parse_radius_policy(text);
    EXPECT_EQ(thames::to_string(thames::parse_radius_policy(thames::to_string(p))), thames::to_string(p));
  }
  EXPECT_EQ(kind_of([] { thames::parse_radius_policy("fixed:abc"); }), ErrorKind::InvalidInput);
  EXPECT_EQ(kind_of([] { thames::parse_radius_policy("median"); }), ErrorKind::InvalidInput);
}
