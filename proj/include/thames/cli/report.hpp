#pragma once

// JSON report emitted by `thames estimate` / `thames correct`.
//
// Keys are written in a fixed order and every real with 17 significant digits,
// so identical inputs give byte-identical output. An unbounded CI endpoint is
// written as null.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "thames/error.hpp"
#include "thames/result.hpp"

namespace thames::cli {

struct EstimateReport {
  double log_z = 0.0;
  double log_recip_z = 0.0;
  Interval ci_log_z{0.0, 0.0};
  double ci_level = 0.95;
  double se_recip_rel = 0.0;
  double radius = 0.0;
  std::size_t n_inside = 0;
  std::size_t t_estimation = 0;
  std::size_t t_total = 0;
  std::size_t dimension = 0;
  double serial_factor = 1.0;
  std::optional<double> correction_ratio;
  std::optional<Interval> correction_ci;
  std::optional<std::size_t> correction_n;
  std::string support;
  std::string radius_policy;
  bool split = true;
  std::uint64_t seed = 0;
  std::string input_checksum;

  bool operator==(const EstimateReport&) const = default;
};

inline EstimateReport make_report(const ThamesResult& r) {
  EstimateReport rep;
  rep.log_z = r.log_z;
  rep.log_recip_z = r.log_recip_z;
  rep.ci_log_z = r.ci_log_z;
  rep.se_recip_rel = r.se_recip_rel;
  rep.radius = r.radius_used;
  rep.n_inside = r.n_inside;
  rep.t_estimation = r.t_estimation;
  rep.dimension = static_cast<std::size_t>(r.ellipsoid.dim());
  rep.serial_factor = r.serial_factor;
  rep.correction_ratio = r.correction_ratio;
  rep.correction_ci = r.correction_ci;
  return rep;
}

namespace detail {

inline std::string json_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double real_or(const nlohmann::json& v, double if_null) {
  return v.is_null() ? if_null : v.get<double>();
}

}  // namespace detail

inline std::string to_json(const EstimateReport& r) {
  std::ostringstream o;
  auto str = [](const std::string& s) { return nlohmann::json(s).dump(); };
  o << '{';
  o << "\"log_z\":" << detail::json_real(r.log_z);
  o << ",\"log_recip_z\":" << detail::json_real(r.log_recip_z);
  o << ",\"ci_log_z\":{\"lower\":" << detail::json_real(r.ci_log_z.lower)
    << ",\"upper\":" << detail::json_real(r.ci_log_z.upper) << '}';
  o << ",\"ci_level\":" << detail::json_real(r.ci_level);
  o << ",\"se_recip_rel\":" << detail::json_real(r.se_recip_rel);
  o << ",\"radius\":" << detail::json_real(r.radius);
  o << ",\"n_inside\":" << r.n_inside;
  o << ",\"t_estimation\":" << r.t_estimation;
  o << ",\"t_total\":" << r.t_total;
  o << ",\"dimension\":" << r.dimension;
  o << ",\"serial_factor\":" << detail::json_real(r.serial_factor);
  o << ",\"correction_ratio\":" << (r.correction_ratio ? detail::json_real(*r.correction_ratio) : "null");
  o << ",\"correction_ci\":";
  if (r.correction_ci) {
    o << "{\"lower\":" << detail::json_real(r.correction_ci->lower)
      << ",\"upper\":" << detail::json_real(r.correction_ci->upper) << '}';
  } else {
    o << "null";
  }
  o << ",\"correction_n\":" << (r.correction_n ? std::to_string(*r.correction_n) : "null");
  o << ",\"support\":" << str(r.support);
  o << ",\"radius_policy\":" << str(r.radius_policy);
  o << ",\"split\":" << (r.split ? "true" : "false");
  o << ",\"seed\":" << r.seed;
  o << ",\"input_checksum\":" << str(r.input_checksum);
  o << '}';
  return o.str();
}

inline EstimateReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    EstimateReport r;
    r.log_z = j.at("log_z").get<double>();
    r.log_recip_z = j.at("log_recip_z").get<double>();
    r.ci_log_z = Interval{detail::real_or(j.at("ci_log_z").at("lower"), kNegInf),
                          detail::real_or(j.at("ci_log_z").at("upper"), kPosInf)};
    r.ci_level = j.at("ci_level").get<double>();
    r.se_recip_rel = j.at("se_recip_rel").get<double>();
    r.radius = j.at("radius").get<double>();
    r.n_inside = j.at("n_inside").get<std::size_t>();
    r.t_estimation = j.at("t_estimation").get<std::size_t>();
    r.t_total = j.at("t_total").get<std::size_t>();
    r.dimension = j.at("dimension").get<std::size_t>();
    r.serial_factor = j.at("serial_factor").get<double>();
    if (!j.at("correction_ratio").is_null()) r.correction_ratio = j["correction_ratio"].get<double>();
    if (!j.at("correction_ci").is_null()) {
      r.correction_ci = Interval{j["correction_ci"].at("lower").get<double>(),
                                 j["correction_ci"].at("upper").get<double>()};
    }
    if (!j.at("correction_n").is_null()) r.correction_n = j["correction_n"].get<std::size_t>();
    r.support = j.at("support").get<std::string>();
    r.radius_policy = j.at("radius_policy").get<std::string>();
    r.split = j.at("split").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.input_checksum = j.at("input_checksum").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("report is missing or mistypes a field: ") + e.what());
  }
}

/// {"error": "<kind>", "message": "..."} plus optional extra members already rendered as JSON.
inline std::string error_json(ErrorKind kind, const std::string& message, const std::string& extra = "") {
  std::string out = "{\"error\":" + nlohmann::json(std::string(to_string(kind))).dump() +
                    ",\"message\":" + nlohmann::json(message).dump();
  if (!extra.empty()) out += "," + extra;
  return out + "}";
}

/// Exit-code taxonomy: 0 ok, 2 usage, 3 parse / bad input, 4 numerical.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidInput:
      return 3;
    default:
      return 4;
  }
}

}  // namespace thames::cli
