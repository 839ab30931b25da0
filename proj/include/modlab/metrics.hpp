/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/models.hpp"
#include "modlab/serialize.hpp"

namespace modlab {

/// Least-squares F with z_hat ~ F z, fit from task rows. rank_ok reports
/// whether the z rows spanned R^M.
Mat fit_linear_map(const Mat& z_hat, const Mat& z, bool* rank_ok = nullptr);

struct AlignmentReport {
  Mat F;        // M_hat x M
  Mat cosines;  // teacher neuron x student neuron
  Vec best;     // per-teacher-neuron max |cosine|
  double alignment = 0.0;
};

/// min over teacher neurons of the best |cos| between the teacher slice
/// Theta_i (n x M) and the mapped student slices Theta_hat_j F. Zero-norm
/// slices contribute cosine 0.
AlignmentReport module_alignment(const Teacher& teacher,
                                 const Mat& student_theta, const Mat& F);

struct DecodeReport {
  Mat weights;  // (d+1) x M, last row is the intercept
  double r2_val = 0.0;
  double r2_ood = 0.0;
  bool flagged = false;  // under-determined fit or constant targets
};

/// Plain least squares (with intercept) from embeddings to binary masks,
/// fit on the validation split, R^2 averaged over modules on both splits.
DecodeReport linear_decodability(const Mat& emb_val, const Mat& mask_val,
                                 const Mat& emb_ood, const Mat& mask_ood);

/// Fraction of rows whose argmax matches; ties resolve to the lowest index.
double accuracy(const Mat& pred, const Mat& target);

Json alignment_report_to_json(const AlignmentReport& r);
Json decode_report_to_json(const DecodeReport& r);

}  // namespace modlab
