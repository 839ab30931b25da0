/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/param_tree.hpp"

namespace modlab {

enum class LossKind { kMse, kKlLogSoftmax, kXent };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);

/// Row-wise log-softmax.
Mat log_softmax_rows(const Mat& logits);
Mat softmax_rows(const Mat& logits);

/// mse: 1/2 * mean over rows of the squared-error row sum.
/// kl_logsoftmax: mean over rows of KL(softmax(target) || softmax(pred)).
/// xent: mean negative log softmax probability of the target index; target
/// may be one-hot rows or a single index column.
double loss_eval(LossKind kind, const Mat& pred, const Mat& target);

/// d loss / d pred for the same conventions.
Mat loss_grad(LossKind kind, const Mat& pred, const Mat& target);

/// Fraction of rows whose argmax matches (ties -> lowest index on both
/// sides).
double argmax_accuracy(const Mat& pred, const Mat& target);

}  // namespace modlab
