#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"

namespace whcert {
namespace internal {

using Json = nlohmann::ordered_json;

inline Json MatrixJson(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json VectorJson(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <typename J>
Eigen::MatrixXd ParseMatrix(const J& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a non-empty matrix");
  const int r = static_cast<int>(j.size());
  if (!j[0].is_array()) throw std::invalid_argument("expected an array of rows");
  const int c = static_cast<int>(j[0].size());
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) {
      throw std::invalid_argument("ragged matrix");
    }
    for (int k = 0; k < c; ++k) {
      if (!j[i][k].is_number()) throw std::invalid_argument("matrix entry is not a number");
      M(i, k) = j[i][k].template get<double>();
    }
  }
  return M;
}

template <typename J>
Eigen::VectorXd ParseVector(const J& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a non-empty vector");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("vector entry is not a number");
    v[i] = j[i].template get<double>();
  }
  return v;
}

}  // namespace internal
}  // namespace whcert
