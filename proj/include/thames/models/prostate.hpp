#pragma once

// Loader for the prostate-cancer regression fixture: a CSV with a header row,
// the eight predictors lcavol, lweight, age, lbph, svi, lcp, gleason, pgg45 in
// that order, then the response lpsa. Model M_k regresses lpsa on the first k
// predictors, no intercept.

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thames/core.hpp"
#include "thames/error.hpp"
#include "thames/models/linreg.hpp"

namespace thames::models {

inline constexpr std::array<const char*, 9> kProstateColumns = {
    "lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45", "lpsa"};

struct ProstateData {
  Matrix predictors;  // n x 8
  Vector lpsa;
};

inline ProstateData parse_prostate_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::ParseError, "prostate fixture is empty");
  {
    std::stringstream header(line);
    std::string name;
    std::size_t i = 0;
    while (std::getline(header, name, ',')) {
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      require(i < kProstateColumns.size() && name == kProstateColumns[i], ErrorKind::ParseError,
              "prostate header column " + std::to_string(i + 1) + " should be " +
                  (i < kProstateColumns.size() ? kProstateColumns[i] : "absent"));
      ++i;
    }
    require(i == kProstateColumns.size(), ErrorKind::ParseError, "prostate header has too few columns");
  }
  std::vector<std::array<double, 9>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::array<double, 9> row{};
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      require(i < 9, ErrorKind::ParseError, "line " + std::to_string(line_no) + ": too many columns");
      try {
        std::size_t used = 0;
        row[i] = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      ++i;
    }
    require(i == 9, ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected 9 columns");
    rows.push_back(row);
  }
  require(!rows.empty(), ErrorKind::ParseError, "prostate fixture has no data rows");
  ProstateData data{Matrix(static_cast<Eigen::Index>(rows.size()), 8),
                    Vector(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int j = 0; j < 8; ++j) data.predictors(static_cast<Eigen::Index>(r), j) = rows[r][static_cast<std::size_t>(j)];
    data.lpsa[static_cast<Eigen::Index>(r)] = rows[r][8];
  }
  return data;
}

inline ProstateData load_prostate_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ParseError, "cannot open prostate fixture '" + path + "'");
  return parse_prostate_csv(in);
}

/// M_k: lpsa on the first k predictors.
inline LinRegModel prostate_model(const ProstateData& data, int k, double sigma2, double alpha) {
  require(k >= 1 && k <= 8, ErrorKind::InvalidInput, "prostate model size must be in 1..8");
  return LinRegModel{data.predictors.leftCols(k), data.lpsa, sigma2, alpha};
}

}  // namespace thames::models
