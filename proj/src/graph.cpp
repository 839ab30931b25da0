/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace modlab::ad {

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::constant(Mat v) {
  Node n;
  n.value = std::move(v);
  return push(std::move(n));
}

int Tape::param(Mat v) {
  Node n;
  n.value = std::move(v);
  n.needs_grad = true;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (na.value.cols() != nb.value.rows())
    throw std::invalid_argument("matmul: inner dim mismatch");
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value * nb.value;
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    throw std::invalid_argument("add: shape mismatch");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value + nb.value;
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    throw std::invalid_argument("sub: shape mismatch");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value - nb.value;
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.s = s;
  n.needs_grad = nodes_[a].needs_grad;
  n.value = s * nodes_[a].value;
  return push(std::move(n));
}

int Tape::relu(int a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.value = nodes_[a].value.cwiseMax(0.0);
  return push(std::move(n));
}

int Tape::elu(int a) {
  Node n;
  n.op = Op::kElu;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  const Mat& x = nodes_[a].value;
  n.value = x.unaryExpr(
      [](double v) { return v > 0.0 ? v : std::expm1(v); });
  return push(std::move(n));
}

int Tape::add_rowvec(int a, int bias) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[bias];
  if (nb.value.rows() != 1 || nb.value.cols() != na.value.cols())
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols(a)");
  Node n;
  n.op = Op::kAddRowvec;
  n.a = a;
  n.b = bias;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value.rowwise() + nb.value.row(0);
  return push(std::move(n));
}

int Tape::layernorm_rows(int a, double eps) {
  Node n;
  n.op = Op::kLayernorm;
  n.a = a;
  n.s = eps;
  n.needs_grad = nodes_[a].needs_grad;
  const Mat& x = nodes_[a].value;
  n.value.resize(x.rows(), x.cols());
  for (long r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().mean();
    n.value.row(r) = (x.row(r).array() - mu) / std::sqrt(var + eps);
  }
  return push(std::move(n));
}

int Tape::l2_normalize(int a, double eps) {
  Node n;
  n.op = Op::kL2Normalize;
  n.a = a;
  n.s = eps;
  n.needs_grad = nodes_[a].needs_grad;
  const Mat& x = nodes_[a].value;
  double norm = std::max(x.norm(), eps);
  n.value = x / norm;
  return push(std::move(n));
}

int Tape::reshape(int a, long rows, long cols) {
  const Mat& x = nodes_[a].value;
  if (rows * cols != x.rows() * x.cols())
    throw std::invalid_argument("reshape: element count mismatch");
  Node n;
  n.op = Op::kReshape;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.i0 = x.rows();
  n.j0 = x.cols();
  n.value.resize(rows, cols);
  long idx = 0;
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < x.cols(); ++c, ++idx)
      n.value(idx / cols, idx % cols) = x(r, c);
  return push(std::move(n));
}

int Tape::transpose(int a) {
  Node n;
  n.op = Op::kTranspose;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.value = nodes_[a].value.transpose();
  return push(std::move(n));
}

int Tape::block(int a, long i, long j, long rows, long cols) {
  const Mat& x = nodes_[a].value;
  if (i < 0 || j < 0 || i + rows > x.rows() || j + cols > x.cols())
    throw std::invalid_argument("block: out of range");
  Node n;
  n.op = Op::kBlock;
  n.a = a;
  n.needs_grad = nodes_[a].needs_grad;
  n.i0 = i;
  n.j0 = j;
  n.value = x.block(i, j, rows, cols);
  return push(std::move(n));
}

const Mat& Tape::grad(int id) const {
  const Node& n = nodes_[id];
  if (!n.grad_alloc)
    throw std::logic_error("grad requested before backward reached the node");
  return n.grad;
}

void Tape::accumulate(int id, const Mat& g) {
  Node& n = nodes_[id];
  if (!n.grad_alloc) {
    n.grad = g;
    n.grad_alloc = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(int output, const Mat& seed) {
  Node& out = nodes_[output];
  if (seed.rows() != out.value.rows() || seed.cols() != out.value.cols())
    throw std::invalid_argument("backward: seed shape mismatch");
  if (!out.needs_grad) return;
  accumulate(output, seed);

  for (int id = output; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad_alloc || n.op == Op::kLeaf) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::kMatmul:
        if (nodes_[n.a].needs_grad)
          accumulate(n.a, g * nodes_[n.b].value.transpose());
        if (nodes_[n.b].needs_grad)
          accumulate(n.b, nodes_[n.a].value.transpose() * g);
        break;
      case Op::kAdd:
        if (nodes_[n.a].needs_grad) accumulate(n.a, g);
        if (nodes_[n.b].needs_grad) accumulate(n.b, g);
        break;
      case Op::kSub:
        if (nodes_[n.a].needs_grad) accumulate(n.a, g);
        if (nodes_[n.b].needs_grad) accumulate(n.b, -g);
        break;
      case Op::kScale:
        if (nodes_[n.a].needs_grad) accumulate(n.a, n.s * g);
        break;
      case Op::kRelu:
        if (nodes_[n.a].needs_grad) {
          const Mat& x = nodes_[n.a].value;
          accumulate(n.a,
                     (x.array() > 0.0).cast<double>().matrix().cwiseProduct(g));
        }
        break;
      case Op::kElu:
        if (nodes_[n.a].needs_grad) {
          const Mat& x = nodes_[n.a].value;
          // derivative is 1 for x > 0 and elu(x) + 1 otherwise
          Mat d = x.binaryExpr(n.value, [](double xv, double yv) {
            return xv > 0.0 ? 1.0 : yv + 1.0;
          });
          accumulate(n.a, d.cwiseProduct(g));
        }
        break;
      case Op::kAddRowvec:
        if (nodes_[n.a].needs_grad) accumulate(n.a, g);
        if (nodes_[n.b].needs_grad)
          accumulate(n.b, g.colwise().sum());
        break;
      case Op::kLayernorm:
        if (nodes_[n.a].needs_grad) {
          const Mat& x = nodes_[n.a].value;
          Mat dx(x.rows(), x.cols());
          for (long r = 0; r < x.rows(); ++r) {
            double mu = x.row(r).mean();
            double var = (x.row(r).array() - mu).square().mean();
            double inv = 1.0 / std::sqrt(var + n.s);
            const auto y = n.value.row(r).array();
            const auto gy = g.row(r).array();
            double gmean = gy.mean();
            double gymean = (gy * y).mean();
            dx.row(r) = inv * (gy - gmean - y * gymean);
          }
          accumulate(n.a, dx);
        }
        break;
      case Op::kL2Normalize:
        if (nodes_[n.a].needs_grad) {
          const Mat& x = nodes_[n.a].value;
          double norm = std::max(x.norm(), n.s);
          double dot = (n.value.array() * g.array()).sum();
          accumulate(n.a, (g - dot * n.value) / norm);
        }
        break;
      case Op::kReshape:
        if (nodes_[n.a].needs_grad) {
          Mat da(n.i0, n.j0);
          long idx = 0;
          const long cols = n.value.cols();
          for (long r = 0; r < n.i0; ++r)
            for (long c = 0; c < n.j0; ++c, ++idx)
              da(r, c) = g(idx / cols, idx % cols);
          accumulate(n.a, da);
        }
        break;
      case Op::kTranspose:
        if (nodes_[n.a].needs_grad) accumulate(n.a, g.transpose());
        break;
      case Op::kBlock:
        if (nodes_[n.a].needs_grad) {
          const Mat& x = nodes_[n.a].value;
          Mat da = Mat::Zero(x.rows(), x.cols());
          da.block(n.i0, n.j0, g.rows(), g.cols()) = g;
          accumulate(n.a, da);
        }
        break;
      case Op::kLeaf:
        break;
    }
  }
}

}  // namespace modlab::ad
