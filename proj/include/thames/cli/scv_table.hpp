#pragma once

// Normal-theory SCV table behind `thames scv`: one row per (d, policy) with the
// optimal radius, the bounds, the chi-square probability content of the
// ellipsoid and the SCV ratio to the optimum.
//
// Policies: sqrt_d_plus_1 | chisq_median | optimal | fixed:<c> | shift:<L> (c = sqrt(d + L)).

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "thames/error.hpp"
#include "thames/radius.hpp"

namespace thames::cli {

struct ScvPolicy {
  std::string name;
  RadiusPolicy policy;          // used unless shift is set
  std::optional<double> shift;  // c = sqrt(d + shift)
};

inline ScvPolicy parse_scv_policy(const std::string& text) {
  if (text.rfind("shift:", 0) == 0) {
    const auto v = parse_number_list(text.substr(6));
    require(v.size() == 1 && std::isfinite(v[0]), ErrorKind::InvalidInput, "shift takes one finite value");
    return ScvPolicy{text, radius_policy::SqrtDPlusOne{}, v[0]};
  }
  RadiusPolicy p = parse_radius_policy(text);
  require(!std::holds_alternative<radius_policy::EmpiricalGrid>(p), ErrorKind::InvalidInput,
          "grid policies need posterior draws and cannot appear in the SCV table");
  return ScvPolicy{text, p, std::nullopt};
}

inline std::vector<ScvPolicy> parse_scv_policies(const std::string& csv) {
  std::vector<ScvPolicy> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = csv.find(',', start);
    out.push_back(parse_scv_policy(csv.substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct ScvRow {
  int d;
  std::string policy;
  double c;
  double scv;
  double c_d;
  double L_d;
  double scv_opt;
  double lower_bound;
  double upper_bound;
  double hpd;           // P(chi2_d < c^2)
  double ratio_to_opt;  // scv / scv_opt
};

inline std::vector<ScvRow> scv_table(int dmin, int dmax, const std::vector<ScvPolicy>& policies) {
  require(dmin >= 1 && dmax >= dmin, ErrorKind::InvalidInput, "need 1 <= dmin <= dmax");
  require(!policies.empty(), ErrorKind::InvalidInput, "no SCV policies given");
  std::vector<ScvRow> rows;
  for (int d = dmin; d <= dmax; ++d) {
    const OptimalRadius opt = optimal_radius(d);
    const ScvBounds b = scv_bounds(d);
    for (const ScvPolicy& p : policies) {
      double c = 0.0;
      if (p.shift) {
        require(d + *p.shift > 0.0, ErrorKind::InvalidInput, "shift makes d + L non-positive");
        c = std::sqrt(d + *p.shift);
      } else {
        c = *resolve_radius(p.policy, d);
      }
      const double scv = scv_normal(d, c);
      rows.push_back(ScvRow{d, p.name, c, scv, opt.c_d, opt.L_d, opt.scv_at_opt, b.lower, b.upper,
                            chi_square_cdf(d, c * c), scv / opt.scv_at_opt});
    }
  }
  return rows;
}

inline void write_scv_csv(std::ostream& out, const std::vector<ScvRow>& rows) {
  out << "d,policy,c,scv,c_d,L_d,scv_opt,lower_bound,upper_bound,hpd,ratio_to_opt\n";
  char buf[512];
  for (const ScvRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.d,
                  r.policy.c_str(), r.c, r.scv, r.c_d, r.L_d, r.scv_opt, r.lower_bound, r.upper_bound, r.hpd,
                  r.ratio_to_opt);
    out << buf;
  }
}

}  // namespace thames::cli
