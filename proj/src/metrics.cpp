/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/metrics.hpp"

#include <cmath>

namespace modlab {

Mat fit_linear_map(const Mat& z_hat, const Mat& z, bool* rank_ok) {
  if (z_hat.rows() != z.rows())
    throw std::invalid_argument("fit_linear_map: task count mismatch");
  if (z.rows() < z.cols())
    throw std::invalid_argument("fit_linear_map: need at least M tasks");
  // z_hat ~ z F^T row-wise; solve via SVD pseudo-inverse
  Eigen::JacobiSVD<Mat> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (rank_ok) {
    svd.setThreshold(1e-10);
    *rank_ok = svd.rank() == z.cols();
  }
  Mat Ft = svd.solve(z_hat);
  return Ft.transpose();
}

namespace {

double flat_cosine(const Mat& a, const Mat& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return (a.array() * b.array()).sum() / (na * nb);
}

}  // namespace

AlignmentReport module_alignment(const Teacher& teacher,
                                 const Mat& student_theta, const Mat& F) {
  const int n = teacher.n;
  if (student_theta.rows() % n != 0)
    throw std::invalid_argument("module_alignment: student rows not h*n");
  if (F.rows() != student_theta.cols() || F.cols() != teacher.M)
    throw std::invalid_argument("module_alignment: F shape mismatch");
  const int h_hat = static_cast<int>(student_theta.rows()) / n;
  const int m_hat = static_cast<int>(student_theta.cols());

  AlignmentReport rep;
  rep.F = F;
  rep.cosines.resize(teacher.h, h_hat);
  rep.best.resize(teacher.h);
  std::vector<Mat> mapped(h_hat);
  for (int j = 0; j < h_hat; ++j)
    mapped[j] = student_theta.block(j * n, 0, n, m_hat) * F;
  double score = 1.0;
  for (int i = 0; i < teacher.h; ++i) {
    Mat slice = teacher.neuron_slice(i);
    double best = 0.0;
    for (int j = 0; j < h_hat; ++j) {
      double c = flat_cosine(slice, mapped[j]);
      rep.cosines(i, j) = c;
      best = std::max(best, std::abs(c));
    }
    rep.best[i] = best;
    score = std::min(score, best);
  }
  rep.alignment = score;
  return rep;
}

namespace {

// Average R^2 over mask columns; constant target columns are skipped and
// flagged rather than propagating NaN.
double mean_r2(const Mat& pred, const Mat& target, bool* flagged) {
  double total = 0.0;
  int counted = 0;
  for (long c = 0; c < target.cols(); ++c) {
    double mean = target.col(c).mean();
    double ss_tot = (target.col(c).array() - mean).square().sum();
    if (ss_tot <= 0.0) {
      *flagged = true;
      continue;
    }
    double ss_res = (target.col(c) - pred.col(c)).squaredNorm();
    total += 1.0 - ss_res / ss_tot;
    ++counted;
  }
  if (counted == 0) {
    *flagged = true;
    return 0.0;
  }
  return total / counted;
}

}  // namespace

DecodeReport linear_decodability(const Mat& emb_val, const Mat& mask_val,
                                 const Mat& emb_ood, const Mat& mask_ood) {
  if (emb_val.rows() != mask_val.rows() || emb_ood.rows() != mask_ood.rows())
    throw std::invalid_argument("linear_decodability: row count mismatch");
  DecodeReport rep;
  const long d = emb_val.cols();
  Mat A(emb_val.rows(), d + 1);
  A.leftCols(d) = emb_val;
  A.col(d).setOnes();
  if (A.rows() < A.cols()) rep.flagged = true;
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  rep.weights = svd.solve(mask_val);

  Mat pred_val = A * rep.weights;
  Mat B(emb_ood.rows(), d + 1);
  B.leftCols(d) = emb_ood;
  B.col(d).setOnes();
  Mat pred_ood = B * rep.weights;
  rep.r2_val = mean_r2(pred_val, mask_val, &rep.flagged);
  rep.r2_ood = mean_r2(pred_ood, mask_ood, &rep.flagged);
  return rep;
}

double accuracy(const Mat& pred, const Mat& target) {
  return argmax_accuracy(pred, target);
}

Json alignment_report_to_json(const AlignmentReport& r) {
  return Json{{"alignment", r.alignment},
              {"F", mat_to_json(r.F)},
              {"cosines", mat_to_json(r.cosines)},
              {"best", mat_to_json(r.best)}};
}

Json decode_report_to_json(const DecodeReport& r) {
  return Json{{"r2_val", r.r2_val},
              {"r2_ood", r.r2_ood},
              {"flagged", r.flagged},
              {"weights", mat_to_json(r.weights)}};
}

}  // namespace modlab
