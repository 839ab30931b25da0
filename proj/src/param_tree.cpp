/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/param_tree.hpp"

#include <cmath>

namespace modlab {

bool ParamTree::same_shape(const ParamTree& other) const {
  if (leaves.size() != other.leaves.size()) return false;
  auto it = leaves.begin();
  auto jt = other.leaves.begin();
  for (; it != leaves.end(); ++it, ++jt) {
    if (it->first != jt->first) return false;
    if (it->second.rows() != jt->second.rows() ||
        it->second.cols() != jt->second.cols())
      return false;
  }
  return true;
}

ParamTree ParamTree::zeros_like() const {
  ParamTree out;
  for (const auto& [k, v] : leaves)
    out.leaves.emplace(k, Mat::Zero(v.rows(), v.cols()));
  return out;
}

ParamTree ParamTree::axpy(double alpha, const ParamTree& other) const {
  if (!same_shape(other))
    throw std::invalid_argument("ParamTree::axpy: shape mismatch");
  ParamTree out = *this;
  for (auto& [k, v] : out.leaves) v += alpha * other.leaves.at(k);
  return out;
}

ParamTree ParamTree::scaled(double alpha) const {
  ParamTree out = *this;
  for (auto& [k, v] : out.leaves) v *= alpha;
  return out;
}

double ParamTree::squared_norm() const {
  double s = 0.0;
  for (const auto& [k, v] : leaves) s += v.squaredNorm();
  return s;
}

double ParamTree::global_norm() const { return std::sqrt(squared_norm()); }

Vec ParamTree::flatten() const {
  Vec flat(num_params());
  long off = 0;
  for (const auto& [k, v] : leaves) {
    for (long i = 0; i < v.rows(); ++i)
      for (long j = 0; j < v.cols(); ++j) flat[off++] = v(i, j);
  }
  return flat;
}

ParamTree ParamTree::unflatten(const Vec& flat) const {
  if (flat.size() != num_params())
    throw std::invalid_argument("ParamTree::unflatten: length mismatch");
  ParamTree out = *this;
  long off = 0;
  for (auto& [k, v] : out.leaves) {
    for (long i = 0; i < v.rows(); ++i)
      for (long j = 0; j < v.cols(); ++j) v(i, j) = flat[off++];
  }
  return out;
}

Mat trunc_normal_init(int rows, int cols, double std_dev, RngState& rng) {
  if (std_dev <= 0.0)
    throw std::invalid_argument("trunc_normal_init: std must be positive");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.trunc_normal(std_dev);
  return m;
}

Mat uniform_unit_variance_init(int rows, int cols, RngState& rng) {
  const double b = std::sqrt(3.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-b, b);
  return m;
}

ParamTree clip_global_norm(const ParamTree& grads, double max_norm) {
  if (max_norm <= 0.0)
    throw std::invalid_argument("clip_global_norm: max_norm must be positive");
  double norm = grads.global_norm();
  if (norm <= max_norm) return grads;
  return grads.scaled(max_norm / norm);
}

}  // namespace modlab
