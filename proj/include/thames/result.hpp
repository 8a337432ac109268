#pragma once

#include <cstddef>
#include <optional>

#include "thames/core.hpp"

namespace thames {

struct Interval {
  double lower;
  double upper;

  bool operator==(const Interval&) const = default;
};

struct ThamesResult {
  double log_recip_z;   // log of the estimate of 1/Z
  double log_z;         // -log_recip_z
  double se_recip_rel;  // standard error of 1/Z-hat divided by 1/Z-hat
  Interval ci_log_z;    // bounds may be -inf / +inf
  std::size_t t_estimation;
  std::size_t n_inside;
  double radius_used;
  std::optional<double> correction_ratio;
  std::optional<Interval> correction_ci;
  double serial_factor = 1.0;  // variance inflation actually applied
  Ellipsoid ellipsoid;
};

}  // namespace thames
