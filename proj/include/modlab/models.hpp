/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/losses.hpp"
#include "modlab/value_grad.hpp"

namespace modlab {

enum class Arch {
  kLinearHnetTheory,
  kLinearHnet,
  kNonlinearHnet,
  kMaml,
  kAnil,
};

Arch arch_from_string(const std::string& s);
std::string to_string(Arch a);

struct ModelDims {
  int n = 0;  // input dimension
  int o = 0;  // output dimension
  int h = 0;  // base-net hidden width
  int L = 1;  // number of hidden layers
  int M = 0;  // embedding / module count (hypernets only)
  int g = 0;  // nonlinear generator hidden width (0 -> 4*M)

  int gen_hidden() const { return g > 0 ? g : 4 * M; }
};

/// Teacher for the theory setting: a 2-layer MLP whose first layer is a
/// linear combination of M modules. theta is (h*n) x M with module m in
/// column m, stored row-major per generated weight matrix; the slice for
/// hidden neuron i is theta.block(i*n, 0, n, M).
struct Teacher {
  Mat theta;  // (h*n) x M
  Mat a;      // h x o readout
  int M = 0, n = 0, h = 0, o = 0;

  /// n x M slice of neuron i.
  Mat neuron_slice(int i) const { return theta.block(i * n, 0, n, M); }
};

/// W(theta, z): h x n combination of the modules.
Mat generate_W(const Mat& theta, const Vec& z, int h, int n);

/// Rows of X are inputs; output rows are relu((1/sqrt(n)) W x)^T a.
Mat teacher_forward(const Teacher& t, const Vec& z, const Mat& X);

struct ModelInit {
  ParamTree shared;
  ParamTree fast_init;
};

/// Parameter layout and initialization for each architecture. Weight leaves
/// are truncated normal with std 1/sqrt(fan-in) (hypernet generators:
/// 1/sqrt(M)), biases zero, embedding initial values uniform unit-variance.
ModelInit init_model(Arch arch, const ModelDims& dims, RngState& rng);

/// Fast-parameter starting point derived from the shared tree (the init_*
/// leaves). The theory student keeps its random fast_init instead.
ParamTree fast_init_from_shared(Arch arch, const ParamTree& shared);

/// Pure forward pass; rows of X are inputs.
Mat student_forward(Arch arch, const ModelDims& dims, const ParamTree& shared,
                    const ParamTree& fast, const Mat& X);

struct LossGrads {
  double loss = 0.0;
  Mat pred;
  ParamTree d_shared;  // empty unless requested
  ParamTree d_fast;
};

/// Loss plus exact analytic gradients with respect to the requested trees.
LossGrads model_loss(Arch arch, const ModelDims& dims, LossKind loss,
                     const ParamTree& shared, const ParamTree& fast,
                     const Batch& batch, bool want_shared, bool want_fast);

/// Merged tree with "s:" / "f:" name prefixes, for whole-model gradient
/// consumers (value_and_grad registry, finite-difference tests).
ParamTree merge_params(const ParamTree& shared, const ParamTree& fast);
void split_params(const ParamTree& merged, ParamTree* shared, ParamTree* fast);

/// Registers "<arch>/<loss>" ids for all three losses over the merged tree.
void register_model(Arch arch, const ModelDims& dims);

/// Paper architecture tables per experiment. Throws std::out_of_range on
/// unknown experiment names.
ModelDims default_dims(const std::string& experiment, Arch arch);

}  // namespace modlab
