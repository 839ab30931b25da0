/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <vector>

#include "modlab/param_tree.hpp"

namespace modlab::ad {

/// Reverse-mode tape over dense matrices with a fixed op vocabulary. Node
/// ids are indices into the tape; build the forward pass, then call
/// backward() once with a seed gradient at the output.
class Tape {
 public:
  int constant(Mat v);
  /// Like constant but participates in the backward pass.
  int param(Mat v);

  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int scale(int a, double s);
  int relu(int a);
  int elu(int a);
  /// Adds a 1 x c bias row to every row of a.
  int add_rowvec(int a, int bias);
  /// Per-row normalization to zero mean, unit variance. No affine part.
  int layernorm_rows(int a, double eps = 1e-6);
  /// Whole-matrix l2 normalization (used for embedding vectors).
  int l2_normalize(int a, double eps = 1e-12);
  /// Row-major reshape.
  int reshape(int a, long rows, long cols);
  int transpose(int a);
  /// Sub-block view; backward scatters into the source.
  int block(int a, long i, long j, long rows, long cols);

  const Mat& value(int id) const { return nodes_[id].value; }
  const Mat& grad(int id) const;
  /// True once backward() has deposited a gradient at the node.
  bool has_grad(int id) const { return nodes_[id].grad_alloc; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  long size() const { return static_cast<long>(nodes_.size()); }

  /// Accumulates gradients for every reachable node with needs_grad set.
  /// seed must match the output value's shape.
  void backward(int output, const Mat& seed);

 private:
  enum class Op {
    kLeaf,
    kMatmul,
    kAdd,
    kSub,
    kScale,
    kRelu,
    kElu,
    kAddRowvec,
    kLayernorm,
    kL2Normalize,
    kReshape,
    kTranspose,
    kBlock,
  };
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    bool grad_alloc = false;
    Op op = Op::kLeaf;
    int a = -1;
    int b = -1;
    double s = 0.0;     // scale factor or eps
    long i0 = 0, j0 = 0;  // block offsets / reshape dims
  };

  int push(Node n);
  void accumulate(int id, const Mat& g);

  std::vector<Node> nodes_;
};

}  // namespace modlab::ad
