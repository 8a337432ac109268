#pragma once

// Text form of support predicates for `thames correct --support`:
//   unbounded
//   positive:i,j,...        (0-based coordinates)
//   box:lo:hi,lo:hi,...     (one pair per coordinate; -inf / inf allowed)
//   simplex                 (all coordinates)
//   simplex:i,j,...

#include <cstddef>
#include <string>
#include <vector>

#include "thames/correction.hpp"
#include "thames/error.hpp"

namespace thames::cli {

namespace detail {

inline std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_on(text, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(!item.empty() && used == item.size() && item.front() != '-', ErrorKind::InvalidInput,
            "bad coordinate index '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline double parse_bound(const std::string& item) {
  if (item == "-inf") return kNegInf;
  if (item == "inf" || item == "+inf") return kPosInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(item, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(!item.empty() && used == item.size() && std::isfinite(v), ErrorKind::InvalidInput,
          "bad box bound '" + item + "'");
  return v;
}

}  // namespace detail

/// Parses the support flag for a d-dimensional parameter and validates it.
inline SupportPredicate parse_support(const std::string& text, Eigen::Index d) {
  SupportPredicate out;
  if (text == "unbounded") {
    out = support::Unbounded{};
  } else if (text == "simplex") {
    out = simplex_support(static_cast<std::size_t>(d));
  } else if (text.rfind("simplex:", 0) == 0) {
    out = support::Simplex{detail::parse_indices(text.substr(8))};
  } else if (text.rfind("positive:", 0) == 0) {
    out = support::PositiveOrthant{detail::parse_indices(text.substr(9))};
  } else if (text.rfind("box:", 0) == 0) {
    const auto pairs = detail::split_on(text.substr(4), ',');
    require(static_cast<Eigen::Index>(pairs.size()) == d, ErrorKind::InvalidInput,
            "box support needs one lo:hi pair per coordinate (" + std::to_string(d) + ")");
    support::Box box{Vector(d), Vector(d)};
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ends = detail::split_on(pairs[static_cast<std::size_t>(i)], ':');
      require(ends.size() == 2, ErrorKind::InvalidInput,
              "box entry '" + pairs[static_cast<std::size_t>(i)] + "' is not lo:hi");
      box.lower[i] = detail::parse_bound(ends[0]);
      box.upper[i] = detail::parse_bound(ends[1]);
    }
    out = std::move(box);
  } else {
    fail(ErrorKind::InvalidInput, "unknown support '" + text + "'");
  }
  validate(out, d);
  return out;
}

}  // namespace thames::cli
