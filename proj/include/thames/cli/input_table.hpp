#pragma once

// Posterior-sample tables.
//
// CSV: a header row naming theta_1..theta_d, then either log_prior and
// log_likelihood or a single log_unnorm_posterior column, plus an optional
// chain column. Columns may appear in any order. Densities are natural logs;
// the literal token -inf marks a zero density. Chains are concatenated in file
// order, so splitting later happens on that order.
//
// JSONL (selected by the .jsonl extension): one object per line with the same
// keys; -inf is written as the string "-inf".

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thames/core.hpp"
#include "thames/error.hpp"

namespace thames::cli {

struct InputTable {
  DrawMatrix draws;
  LogDensityVector log_post;
  std::optional<LogDensityVector> log_prior;
  std::optional<LogDensityVector> log_likelihood;
  std::vector<std::string> chain;  // empty when the column is absent
  std::string checksum;
};

/// FNV-1a, 64 bit, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& msg) {
  fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// A finite real, or -inf when allowed.
inline double parse_real(std::string_view tok, bool allow_neg_inf, std::size_t line,
                         const std::string& column) {
  if (allow_neg_inf && tok == "-inf") return kNegInf;
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (tok.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    parse_fail(line, "column " + column + ": '" + std::string(tok) + "' is not " +
                         (allow_neg_inf ? "a finite number or -inf" : "a finite number"));
  }
  return v;
}

struct Layout {
  std::size_t n_columns = 0;
  std::vector<std::size_t> theta;  // theta[k] = position of theta_{k+1}
  std::optional<std::size_t> log_prior;
  std::optional<std::size_t> log_likelihood;
  std::optional<std::size_t> log_unnorm;
  std::optional<std::size_t> chain;
};

inline Layout layout_from_names(const std::vector<std::string>& names, std::size_t line) {
  Layout lay;
  lay.n_columns = names.size();
  std::map<std::size_t, std::size_t> theta_pos;
  auto claim = [&](std::optional<std::size_t>& slot, std::size_t pos, const std::string& name) {
    if (slot) parse_fail(line, "duplicate column " + name);
    slot = pos;
  };
  for (std::size_t pos = 0; pos < names.size(); ++pos) {
    const std::string& name = names[pos];
    if (name.rfind("theta_", 0) == 0) {
      std::size_t k = 0;
      const char* first = name.data() + 6;
      const char* last = name.data() + name.size();
      const auto [ptr, ec] = std::from_chars(first, last, k);
      if (ec != std::errc() || ptr != last || k == 0) parse_fail(line, "bad column name " + name);
      if (!theta_pos.emplace(k, pos).second) parse_fail(line, "duplicate column " + name);
    } else if (name == "log_prior") {
      claim(lay.log_prior, pos, name);
    } else if (name == "log_likelihood") {
      claim(lay.log_likelihood, pos, name);
    } else if (name == "log_unnorm_posterior") {
      claim(lay.log_unnorm, pos, name);
    } else if (name == "chain") {
      claim(lay.chain, pos, name);
    } else {
      parse_fail(line, "unknown column '" + name + "'");
    }
  }
  if (theta_pos.empty()) parse_fail(line, "no theta_k columns");
  if (theta_pos.rbegin()->first != theta_pos.size()) {
    parse_fail(line, "theta columns must be theta_1..theta_d without gaps");
  }
  for (const auto& [k, pos] : theta_pos) lay.theta.push_back(pos);
  const bool pair = lay.log_prior && lay.log_likelihood;
  const bool any_pair = lay.log_prior || lay.log_likelihood;
  if (lay.log_unnorm ? any_pair : !pair) {
    parse_fail(line, "need either log_prior and log_likelihood, or log_unnorm_posterior");
  }
  return lay;
}

struct RowSink {
  std::vector<double> theta;  // row-major
  std::vector<double> prior;
  std::vector<double> like;
  std::vector<double> post;
  std::vector<std::string> chain;
  std::size_t rows = 0;
};

inline InputTable assemble(const Layout& lay, RowSink& sink, std::string checksum) {
  require(sink.rows >= 1, ErrorKind::ParseError, "input has no data rows");
  const auto d = static_cast<Eigen::Index>(lay.theta.size());
  const auto t = static_cast<Eigen::Index>(sink.rows);
  InputTable table;
  table.draws = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      sink.theta.data(), t, d);
  if (lay.log_unnorm) {
    table.log_post = Eigen::Map<const Vector>(sink.post.data(), t);
  } else {
    table.log_prior = Eigen::Map<const Vector>(sink.prior.data(), t);
    table.log_likelihood = Eigen::Map<const Vector>(sink.like.data(), t);
    table.log_post = *table.log_prior + *table.log_likelihood;
  }
  table.chain = std::move(sink.chain);
  table.checksum = std::move(checksum);
  return table;
}

}  // namespace detail

inline InputTable parse_csv_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<detail::Layout> lay;
  detail::RowSink sink;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (!lay) {
      std::vector<std::string> names(cells.begin(), cells.end());
      lay = detail::layout_from_names(names, line_no);
      continue;
    }
    if (cells.size() != lay->n_columns) {
      detail::parse_fail(line_no, "expected " + std::to_string(lay->n_columns) + " columns, found " +
                                      std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < lay->theta.size(); ++k) {
      sink.theta.push_back(
          detail::parse_real(cells[lay->theta[k]], false, line_no, "theta_" + std::to_string(k + 1)));
    }
    if (lay->log_unnorm) {
      sink.post.push_back(detail::parse_real(cells[*lay->log_unnorm], true, line_no, "log_unnorm_posterior"));
    } else {
      sink.prior.push_back(detail::parse_real(cells[*lay->log_prior], true, line_no, "log_prior"));
      sink.like.push_back(detail::parse_real(cells[*lay->log_likelihood], true, line_no, "log_likelihood"));
    }
    if (lay->chain) sink.chain.emplace_back(cells[*lay->chain]);
    ++sink.rows;
  }
  if (!lay) fail(ErrorKind::ParseError, "input is empty (no header row)");
  return detail::assemble(*lay, sink, fnv1a_hex(text));
}

inline InputTable parse_jsonl_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<detail::Layout> lay;
  std::vector<std::string> names;
  detail::RowSink sink;
  auto number = [&](const nlohmann::json& v, bool allow_neg_inf, const std::string& key) -> double {
    if (v.is_number()) {
      const double x = v.get<double>();
      if (!std::isfinite(x)) detail::parse_fail(line_no, "key " + key + " is not finite");
      return x;
    }
    if (allow_neg_inf && v.is_string() && v.get<std::string>() == "-inf") return kNegInf;
    detail::parse_fail(line_no, "key " + key + " must be a number" + (allow_neg_inf ? " or \"-inf\"" : ""));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      detail::parse_fail(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) detail::parse_fail(line_no, "expected a JSON object");
    std::vector<std::string> keys;
    for (auto it = obj.begin(); it != obj.end(); ++it) keys.push_back(it.key());
    if (!lay) {
      lay = detail::layout_from_names(keys, line_no);
      names = keys;
    } else if (keys != names) {
      detail::parse_fail(line_no, "keys differ from the first record");
    }
    for (std::size_t k = 0; k < lay->theta.size(); ++k) {
      const std::string key = "theta_" + std::to_string(k + 1);
      sink.theta.push_back(number(obj[key], false, key));
    }
    if (lay->log_unnorm) {
      sink.post.push_back(number(obj["log_unnorm_posterior"], true, "log_unnorm_posterior"));
    } else {
      sink.prior.push_back(number(obj["log_prior"], true, "log_prior"));
      sink.like.push_back(number(obj["log_likelihood"], true, "log_likelihood"));
    }
    if (lay->chain) {
      const auto& c = obj["chain"];
      sink.chain.push_back(c.is_string() ? c.get<std::string>() : c.dump());
    }
    ++sink.rows;
  }
  if (!lay) fail(ErrorKind::ParseError, "input is empty");
  return detail::assemble(*lay, sink, fnv1a_hex(text));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::ParseError, "cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline bool has_jsonl_extension(const std::string& path) {
  return path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0;
}

inline InputTable load_input_table(const std::string& path) {
  const std::string text = read_file(path);
  return has_jsonl_extension(path) ? parse_jsonl_table(text) : parse_csv_table(text);
}

inline std::string format_real(double v) {
  if (v == kNegInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes theta_1..theta_d, log_prior, log_likelihood with 17 significant digits.
inline void write_csv_table(std::ostream& out, const DrawMatrix& draws, const LogDensityVector& log_prior,
                            const LogDensityVector& log_likelihood) {
  require(log_prior.size() == draws.rows() && log_likelihood.size() == draws.rows(),
          ErrorKind::InvalidInput, "density columns must match the number of draws");
  for (Eigen::Index k = 0; k < draws.cols(); ++k) out << "theta_" << k + 1 << ',';
  out << "log_prior,log_likelihood\n";
  for (Eigen::Index t = 0; t < draws.rows(); ++t) {
    for (Eigen::Index k = 0; k < draws.cols(); ++k) out << format_real(draws(t, k)) << ',';
    out << format_real(log_prior[t]) << ',' << format_real(log_likelihood[t]) << '\n';
  }
}

}  // namespace thames::cli
