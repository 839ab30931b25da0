/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "modlab/rng.hpp"

namespace modlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Named collection of dense leaves with a stable (lexicographic) order.
struct ParamTree {
  std::map<std::string, Mat> leaves;

  bool has(const std::string& name) const { return leaves.count(name) > 0; }

  Mat& at(const std::string& name) {
    auto it = leaves.find(name);
    if (it == leaves.end())
      throw std::invalid_argument("ParamTree: no leaf named '" + name + "'");
    return it->second;
  }
  const Mat& at(const std::string& name) const {
    auto it = leaves.find(name);
    if (it == leaves.end())
      throw std::invalid_argument("ParamTree: no leaf named '" + name + "'");
    return it->second;
  }

  void set(const std::string& name, Mat value) {
    leaves[name] = std::move(value);
  }

  size_t size() const { return leaves.size(); }
  bool empty() const { return leaves.empty(); }

  /// Total number of scalar entries.
  long num_params() const {
    long n = 0;
    for (const auto& [k, v] : leaves) n += static_cast<long>(v.size());
    return n;
  }

  bool same_shape(const ParamTree& other) const;

  ParamTree zeros_like() const;

  /// this + alpha * other (shapes must match).
  ParamTree axpy(double alpha, const ParamTree& other) const;

  ParamTree scaled(double alpha) const;

  double squared_norm() const;
  double global_norm() const;

  /// Row-major concatenation of all leaves in name order.
  Vec flatten() const;
  /// Inverse of flatten() against this tree's shapes.
  ParamTree unflatten(const Vec& flat) const;
};

/// Matrix with i.i.d. truncated-normal entries (mean 0, given std, cut at
/// +-2 std). Throws std::invalid_argument for non-positive std.
Mat trunc_normal_init(int rows, int cols, double std_dev, RngState& rng);

/// Matrix with i.i.d. uniform entries on [-sqrt(3), sqrt(3)] (unit variance).
Mat uniform_unit_variance_init(int rows, int cols, RngState& rng);

/// Scale all leaves by max_norm/norm when the global L2 norm exceeds
/// max_norm; otherwise return unchanged. Idempotent.
ParamTree clip_global_norm(const ParamTree& grads, double max_norm);

}  // namespace modlab
