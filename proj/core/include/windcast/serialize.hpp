#pragma once

#include <nlohmann/json.hpp>

#include "windcast/dataset.hpp"
#include "windcast/kernel.hpp"
#include "windcast/linear.hpp"

// JSON round-trips for the fitted objects the CLI writes between train and
// evaluate runs. Matrices serialize as arrays of row arrays.

namespace windcast {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const Standardizer& s) {
  j = BasicJsonType::object();
  j["mean"] = vector_to_json(s.mean);
  j["std"] = vector_to_json(s.std);
  j["fitted_on"] = s.fitted_on;
}

template <typename BasicJsonType>
void from_json(const BasicJsonType& j, Standardizer& s) {
  s.mean = vector_from_json(j.at("mean"));
  s.std = vector_from_json(j.at("std"));
  s.fitted_on = j.value("fitted_on", std::string{});
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const LinearModel& m) {
  j = BasicJsonType::object();
  j["weights"] = vector_to_json(m.weights);
  j["intercept"] = m.intercept;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  if (!m.selected.empty()) j["selected"] = m.selected;
  if (std::isfinite(m.lambda)) j["lambda"] = m.lambda;
}

template <typename BasicJsonType>
void from_json(const BasicJsonType& j, LinearModel& m) {
  m.weights = vector_from_json(j.at("weights"));
  m.intercept = j.at("intercept").template get<double>();
  m.converged = j.value("converged", true);
  m.iterations = j.value("iterations", 0);
  m.selected = j.value("selected", std::vector<Eigen::Index>{});
  m.lambda = j.value("lambda", std::numeric_limits<double>::quiet_NaN());
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const NystromKrrModel& m) {
  j = BasicJsonType::object();
  j["anchors"] = matrix_to_json(m.anchors);
  j["alpha"] = vector_to_json(m.alpha);
  j["gamma"] = m.spec.gamma;
  j["lambda"] = m.lambda;
  j["anchor_indices"] = m.anchor_indices;
  j["seed"] = m.seed;
}

template <typename BasicJsonType>
void from_json(const BasicJsonType& j, NystromKrrModel& m) {
  m.anchors = matrix_from_json(j.at("anchors"));
  m.alpha = vector_from_json(j.at("alpha"));
  m.spec.gamma = j.at("gamma").template get<double>();
  m.lambda = j.at("lambda").template get<double>();
  m.anchor_indices = j.value("anchor_indices", std::vector<std::ptrdiff_t>{});
  m.seed = j.value("seed", std::uint64_t{0});
}

}  // namespace windcast
