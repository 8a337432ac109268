#pragma once

// Truncation radius theory for a normal posterior: the squared coefficient of
// variation SCV(d, c) of one estimator term, the integral
//   f(d, c) = c^-(d-2) * int_0^c exp(r^2 / 2) r^(d-1) dr,
// the optimal radius c_d = sqrt(d + L_d), heuristic radii and the closed-form
// SCV bounds. Everything is carried in log space so d in the thousands is fine.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "thames/core.hpp"
#include "thames/error.hpp"

namespace thames {

// ---------------------------------------------------------------------------
// RadiusPolicy

namespace radius_policy {
struct SqrtDPlusOne {};
struct Fixed {
  double c;
};
struct ChiSquareMedian {};
struct OptimalNormal {};
struct EmpiricalGrid {
  std::vector<double> grid;
};
}  // namespace radius_policy

using RadiusPolicy =
    std::variant<radius_policy::SqrtDPlusOne, radius_policy::Fixed, radius_policy::ChiSquareMedian,
                 radius_policy::OptimalNormal, radius_policy::EmpiricalGrid>;

inline void validate(const RadiusPolicy& policy) {
  if (const auto* fixed = std::get_if<radius_policy::Fixed>(&policy)) {
    require(std::isfinite(fixed->c) && fixed->c > 0.0, ErrorKind::InvalidInput,
            "fixed radius must be finite and positive");
  } else if (const auto* grid = std::get_if<radius_policy::EmpiricalGrid>(&policy)) {
    require(!grid->grid.empty(), ErrorKind::InvalidInput, "radius grid is empty");
    for (double c : grid->grid) {
      require(std::isfinite(c) && c > 0.0, ErrorKind::InvalidInput,
              "radius grid entries must be finite and positive");
    }
  }
}

struct OptimalRadius {
  double c_d;
  double L_d;  // c_d^2 - d
  double scv_at_opt;
};

namespace detail {

/// 20-point Gauss-Legendre rule on [-1, 1], built once by Newton iteration on P_20.
struct GaussLegendre20 {
  static constexpr int kOrder = 20;
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};

  GaussLegendre20() {
    constexpr int n = kOrder;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
  }

  static const GaussLegendre20& instance() {
    static const GaussLegendre20 rule;
    return rule;
  }
};

/// log of the integrand exp(r^2/2) r^(d-1), relative to its value at r = c.
inline double log_integrand_rel(double r, int d, double c) {
  const double shape = d == 1 ? 0.0 : (d - 1.0) * std::log(r / c);
  return shape + 0.5 * (r - c) * (r + c);
}

/// log int_{lo}^{c} exp(log_integrand_rel(r)) dr over `panels` equal panels.
inline double log_panel_sum(int d, double c, double lo, int panels) {
  const auto& gl = GaussLegendre20::instance();
  const double width = (c - lo) / panels;
  const double half = 0.5 * width;
  // The integrand is increasing on [0, c] and equals 1 at r = c, so every term is
  // at most 1 and a plain sum cannot overflow.
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    double panel = 0.0;
    for (int k = 0; k < GaussLegendre20::kOrder; ++k) {
      const double r = mid + half * gl.nodes[k];
      panel += gl.weights[k] * std::exp(log_integrand_rel(r, d, c));
    }
    total += panel * half;
  }
  return std::log(total);
}

}  // namespace detail

/// log f(d, c) by adaptive Gauss-Legendre panels, doubling the panel count until
/// successive results agree to 1e-13 in the log.
inline double log_f(int d, double c) {
  require(d >= 1, ErrorKind::InvalidInput, "log_f: dimension must be >= 1");
  require(std::isfinite(c) && c > 0.0, ErrorKind::InvalidInput, "log_f: radius must be positive");

  // Below `lo` the relative integrand is < e^-80 and contributes nothing at double precision.
  // The relative integrand is increasing on (0, c], so a bisection finds the cut.
  double lo = 0.0;
  constexpr double kCut = -80.0;
  const double at_zero = d == 1 ? -0.5 * c * c : kNegInf;
  if (at_zero < kCut) {
    double a = 0.0;
    double b = c;
    for (int i = 0; i < 200 && (b - a) > 1e-15 * c; ++i) {
      const double m = 0.5 * (a + b);
      if (detail::log_integrand_rel(m, d, c) < kCut) a = m; else b = m;
    }
    lo = a;
  }

  constexpr int kMaxPanels = 1 << 16;
  int panels = 1;
  double prev = detail::log_panel_sum(d, c, lo, panels);
  double curr = prev;
  for (panels = 2; panels <= kMaxPanels; panels *= 2) {
    curr = detail::log_panel_sum(d, c, lo, panels);
    if (std::abs(curr - prev) <= 1e-13 * std::max(1.0, std::abs(curr))) break;
    prev = curr;
  }
  require(panels <= kMaxPanels, ErrorKind::NumericalFailure, "log_f quadrature did not converge");
  // int = exp(c^2/2) c^(d-1) * relative integral; f = c^-(d-2) * int.
  return 0.5 * c * c + (d - 1.0) * std::log(c) + curr - (d - 2.0) * std::log(c);
}

/// log kappa_d = log(d * 2^(d/2) * Gamma(d/2 + 1)).
inline double log_kappa(int d) {
  return std::log(static_cast<double>(d)) + 0.5 * d * std::numbers::ln2 + log_gamma(0.5 * d + 1.0);
}

/// log(SCV(d, c) + 1).
inline double log_scv_plus_one(int d, double c) {
  return log_kappa(d) - (d + 2.0) * std::log(c) + log_f(d, c);
}

/// SCV(d, c) = kappa_d c^-(d+2) f(d, c) - 1 for a normal posterior and the oracle ellipsoid.
inline double scv_normal(int d, double c) {
  const double log_value = log_scv_plus_one(d, c);
  if (log_value > 690.0) {
    throw OverflowError("SCV(d=" + std::to_string(d) + ", c=" + std::to_string(c) +
                            ") exceeds double range",
                        log_value);
  }
  return std::expm1(log_value);
}

/// Log of the first-order-condition ratio (d / c^2) f(d, c) / exp(c^2 / 2) divided by 1/2;
/// zero exactly at the optimal radius, negative below it and positive above.
inline double first_order_condition(int d, double c) {
  return std::log(2.0 * d) - 2.0 * std::log(c) + log_f(d, c) - 0.5 * c * c;
}

inline OptimalRadius optimal_radius(int d) {
  require(d >= 1, ErrorKind::InvalidInput, "optimal_radius: dimension must be >= 1");
  const auto g = [d](double c) { return first_order_condition(d, c); };

  auto solve = [&](double a, double b) -> std::optional<double> {
    const double ga = g(a);
    const double gb = g(b);
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if ((ga < 0.0) == (gb < 0.0)) return std::nullopt;
    std::uintmax_t max_iter = 200;
    const auto tol = [](double x, double y) {
      return std::abs(x - y) <= 1e-13 * std::max(std::abs(x), std::abs(y));
    };
    const auto [lo, hi] = boost::math::tools::toms748_solve(g, a, b, ga, gb, tol, max_iter);
    return 0.5 * (lo + hi);
  };

  auto root = solve(std::sqrt(d), std::sqrt(d + 4.0));
  if (!root) root = solve(std::sqrt(d), std::sqrt(2.0 * d + 4.0));
  if (!root) fail(ErrorKind::NumericalFailure, "optimal_radius: bracket does not contain a root");

  const double c = *root;
  return OptimalRadius{c, c * c - d, scv_normal(d, c)};
}

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  require(a > 0.0 && std::isfinite(a), ErrorKind::InvalidInput, "regularized_gamma_p: a must be > 0");
  require(x >= 0.0 && !std::isnan(x), ErrorKind::InvalidInput, "regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  try {
    return boost::math::gamma_p(a, x);
  } catch (const std::exception& ex) {
    fail(ErrorKind::NumericalFailure, std::string("regularized_gamma_p: ") + ex.what());
  }
}

/// chi^2_d CDF at x.
inline double chi_square_cdf(int d, double x) { return regularized_gamma_p(0.5 * d, 0.5 * x); }

/// sqrt of the median of chi^2_d, found by root-finding P(d/2, x/2) = 1/2.
inline double chi_square_median_radius(int d) {
  require(d >= 1, ErrorKind::InvalidInput, "chi_square_median_radius: dimension must be >= 1");
  const auto g = [d](double x) { return chi_square_cdf(d, x) - 0.5; };
  double a = 0.0;
  double b = d + 2.0;
  std::uintmax_t max_iter = 300;
  const auto tol = [](double x, double y) {
    return std::abs(x - y) <= 1e-14 * std::max(std::abs(x), std::abs(y));
  };
  const auto [lo, hi] = boost::math::tools::toms748_solve(g, a, b, g(a), g(b), tol, max_iter);
  return std::sqrt(0.5 * (lo + hi));
}

struct ScvBounds {
  double lower;
  double upper;
};

/// Closed-form sandwich valid for all d >= 1:
///   0.63 sqrt((d+2) pi / 4) - 1 <= SCV(d, c_d) <= SCV(d, sqrt(d+1)) <= 1.09 * 2 sqrt((d+2) pi / 4) - 1.
inline ScvBounds scv_bounds(int d) {
  require(d >= 1, ErrorKind::InvalidInput, "scv_bounds: dimension must be >= 1");
  const double root = std::sqrt((d + 2.0) * std::numbers::pi / 4.0);
  return ScvBounds{0.63 * root - 1.0, 1.09 * 2.0 * root - 1.0};
}

/// Radius for a policy; EmpiricalGrid has no closed form and returns nullopt
/// (the estimator tunes it from the draws).
inline std::optional<double> resolve_radius(const RadiusPolicy& policy, int d) {
  validate(policy);
  require(d >= 1, ErrorKind::InvalidInput, "resolve_radius: dimension must be >= 1");
  return std::visit(
      [d](const auto& p) -> std::optional<double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, radius_policy::SqrtDPlusOne>) {
          return std::sqrt(d + 1.0);
        } else if constexpr (std::is_same_v<P, radius_policy::Fixed>) {
          return p.c;
        } else if constexpr (std::is_same_v<P, radius_policy::ChiSquareMedian>) {
          return chi_square_median_radius(d);
        } else if constexpr (std::is_same_v<P, radius_policy::OptimalNormal>) {
          return optimal_radius(d).c_d;
        } else {
          return std::nullopt;
        }
      },
      policy);
}

// ---------------------------------------------------------------------------
// text form used by the CLI and reports:
//   sqrt_d_plus_1 | fixed:<c> | chisq_median | optimal | grid:<c1,c2,...>

inline std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidInput, "not a number: '" + item + "'");
    }
    require(used == item.size(), ErrorKind::InvalidInput, "not a number: '" + item + "'");
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline RadiusPolicy parse_radius_policy(const std::string& text) {
  RadiusPolicy policy;
  if (text == "sqrt_d_plus_1") {
    policy = radius_policy::SqrtDPlusOne{};
  } else if (text == "chisq_median") {
    policy = radius_policy::ChiSquareMedian{};
  } else if (text == "optimal") {
    policy = radius_policy::OptimalNormal{};
  } else if (text.rfind("fixed:", 0) == 0) {
    const auto values = parse_number_list(text.substr(6));
    require(values.size() == 1, ErrorKind::InvalidInput, "fixed radius takes one value");
    policy = radius_policy::Fixed{values.front()};
  } else if (text.rfind("grid:", 0) == 0) {
    policy = radius_policy::EmpiricalGrid{parse_number_list(text.substr(5))};
  } else {
    fail(ErrorKind::InvalidInput, "unknown radius policy '" + text + "'");
  }
  validate(policy);
  return policy;
}

inline std::string to_string(const RadiusPolicy& policy) {
  return std::visit(
      [](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, radius_policy::SqrtDPlusOne>) {
          return "sqrt_d_plus_1";
        } else if constexpr (std::is_same_v<P, radius_policy::Fixed>) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "fixed:%.17g", p.c);
          return buf;
        } else if constexpr (std::is_same_v<P, radius_policy::ChiSquareMedian>) {
          return "chisq_median";
        } else if constexpr (std::is_same_v<P, radius_policy::OptimalNormal>) {
          return "optimal";
        } else {
          std::string out = "grid:";
          for (std::size_t i = 0; i < p.grid.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", p.grid[i]);
            out += buf;
          }
          return out;
        }
      },
      policy);
}

}  // namespace thames
