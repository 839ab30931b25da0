/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/losses.hpp"

#include <cmath>

namespace modlab {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mse") return LossKind::kMse;
  if (s == "kl_logsoftmax") return LossKind::kKlLogSoftmax;
  if (s == "xent") return LossKind::kXent;
  throw std::invalid_argument("unknown loss kind: " + s);
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::kMse: return "mse";
    case LossKind::kKlLogSoftmax: return "kl_logsoftmax";
    case LossKind::kXent: return "xent";
  }
  return "?";
}

Mat log_softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (long i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    double lse = std::log((logits.row(i).array() - mx).exp().sum()) + mx;
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

Mat softmax_rows(const Mat& logits) {
  return log_softmax_rows(logits).array().exp();
}

namespace {

// Target index per row: either an index column (cols()==1 with integral
// values while pred has >1 columns) or one-hot rows.
long target_index(const Mat& target, long row, long pred_cols) {
  if (target.cols() == 1 && pred_cols > 1)
    return static_cast<long>(target(row, 0));
  long idx = 0;
  target.row(row).maxCoeff(&idx);
  return idx;
}

}  // namespace

double loss_eval(LossKind kind, const Mat& pred, const Mat& target) {
  const long b = pred.rows();
  if (b == 0) throw std::invalid_argument("loss_eval: empty batch");
  switch (kind) {
    case LossKind::kMse: {
      if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("loss_eval: shape mismatch");
      return 0.5 * (pred - target).squaredNorm() / static_cast<double>(b);
    }
    case LossKind::kKlLogSoftmax: {
      if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("loss_eval: shape mismatch");
      Mat lp = log_softmax_rows(pred);
      Mat lt = log_softmax_rows(target);
      Mat pt = lt.array().exp();
      return (pt.array() * (lt - lp).array()).sum() / static_cast<double>(b);
    }
    case LossKind::kXent: {
      if (pred.rows() != target.rows())
        throw std::invalid_argument("loss_eval: shape mismatch");
      Mat lp = log_softmax_rows(pred);
      double s = 0.0;
      for (long i = 0; i < b; ++i) {
        long idx = target_index(target, i, pred.cols());
        if (idx < 0 || idx >= pred.cols())
          throw std::invalid_argument("loss_eval: target index out of range");
        s -= lp(i, idx);
      }
      return s / static_cast<double>(b);
    }
  }
  throw std::logic_error("unreachable");
}

Mat loss_grad(LossKind kind, const Mat& pred, const Mat& target) {
  const double b = static_cast<double>(pred.rows());
  switch (kind) {
    case LossKind::kMse:
      return (pred - target) / b;
    case LossKind::kKlLogSoftmax:
      return (softmax_rows(pred) - softmax_rows(target)) / b;
    case LossKind::kXent: {
      Mat g = softmax_rows(pred);
      for (long i = 0; i < pred.rows(); ++i)
        g(i, target_index(target, i, pred.cols())) -= 1.0;
      return g / b;
    }
  }
  throw std::logic_error("unreachable");
}

double argmax_accuracy(const Mat& pred, const Mat& target) {
  if (pred.rows() != target.rows())
    throw std::invalid_argument("argmax_accuracy: row mismatch");
  long hits = 0;
  for (long i = 0; i < pred.rows(); ++i) {
    long pi = 0;
    pred.row(i).maxCoeff(&pi);
    // lowest index on ties
    for (long j = 0; j < pi; ++j)
      if (pred(i, j) == pred(i, pi)) { pi = j; break; }
    long ti = target_index(target, i, pred.cols());
    if (target.cols() == pred.cols()) {
      long best = 0;
      target.row(i).maxCoeff(&best);
      for (long j = 0; j < best; ++j)
        if (target(i, j) == target(i, best)) { best = j; break; }
      ti = best;
    }
    if (pi == ti) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

}  // namespace modlab
