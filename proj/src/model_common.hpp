#pragma once

// Internal helpers shared by the model family implementations.

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "finshap/common.hpp"

namespace finshap::detail {

inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return 0.0;
  return std::log1p(std::exp(z));
}

inline void validate_training_inputs(const Matrix& X, const std::vector<int>& y) {
  if (X.rows() == 0 || X.cols() == 0) throw DataError("train: empty matrix");
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw DataError("train: X has " + std::to_string(X.rows()) + " rows, y has " +
                    std::to_string(y.size()));
  }
  if (!X.allFinite()) throw DataError("train: X contains non-finite values");
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("train: labels must be 0 or 1");
  }
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Vector vector_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json doc;
  doc["rows"] = m.rows();
  doc["cols"] = m.cols();
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  doc["data"] = std::move(data);
  return doc;
}

inline Matrix matrix_from_json(const nlohmann::json& doc) {
  const auto rows = doc.at("rows").get<Eigen::Index>();
  const auto cols = doc.at("cols").get<Eigen::Index>();
  const auto& data = doc.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DataError("model json: matrix payload size mismatch");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

}  // namespace finshap::detail
