/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modlab/metrics.hpp"
#include "modlab/teacherstudent.hpp"

using namespace modlab;

namespace {

Mat random_mat(int r, int c, RngState& rng) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("fit_linear_map recovers a planted map") {
  RngState rng(1);
  const int M = 4, M_hat = 6, T = 50;
  Mat F_true = random_mat(M_hat, M, rng);
  Mat z = random_mat(T, M, rng);
  Mat z_hat = z * F_true.transpose();  // rows: (F z)^T
  bool rank_ok = false;
  Mat F = fit_linear_map(z_hat, z, &rank_ok);
  CHECK(rank_ok);
  CHECK((F - F_true).norm() == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("fit_linear_map flags rank deficiency") {
  RngState rng(2);
  const int M = 3, T = 20;
  Mat z = Mat::Zero(T, M);
  for (int i = 0; i < T; ++i) z(i, 0) = rng.normal();  // only module 0 varies
  Mat z_hat = random_mat(T, 2, rng);
  bool rank_ok = true;
  (void)fit_linear_map(z_hat, z, &rank_ok);
  CHECK_FALSE(rank_ok);
}

TEST_CASE("module alignment is 1 for the teacher against itself") {
  RngState rng(3);
  TheoryDims dims{4, 5, 6, 2};
  Teacher t = make_teacher(dims, rng);
  Mat F = Mat::Identity(dims.M, dims.M);
  AlignmentReport rep = module_alignment(t, t.theta, F);
  CHECK(rep.alignment == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.best.size() == dims.h);
  CHECK(rep.cosines.rows() == dims.h);
  CHECK(rep.cosines.cols() == dims.h);
}

TEST_CASE("module alignment is invariant to per-neuron scaling and sign") {
  RngState rng(4);
  TheoryDims dims{3, 4, 5, 2};
  Teacher t = make_teacher(dims, rng);
  Mat student = t.theta;
  for (int i = 0; i < dims.h; ++i) {
    const double c = (i % 2 == 0 ? 1.0 : -1.0) * (0.5 + i);
    student.block(i * dims.n, 0, dims.n, dims.M) *= c;
  }
  Mat F = Mat::Identity(dims.M, dims.M);
  CHECK(module_alignment(t, student, F).alignment ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("module alignment degrades for an unrelated student") {
  RngState rng(5);
  TheoryDims dims{4, 6, 8, 2};
  Teacher t = make_teacher(dims, rng);
  Mat student = random_mat(dims.h * dims.n, dims.M, rng);
  Mat F = Mat::Identity(dims.M, dims.M);
  double a = module_alignment(t, student, F).alignment;
  CHECK(a < 0.95);
  CHECK(a >= 0.0);
}

TEST_CASE("module alignment handles a wider student and zero slices") {
  RngState rng(6);
  TheoryDims dims{3, 4, 4, 2};
  Teacher t = make_teacher(dims, rng);
  const int M_hat = 6;
  // first M_hat/2 student modules copy the teacher (permuted), rest zero
  Mat student = Mat::Zero(dims.h * dims.n, M_hat);
  Mat F = Mat::Zero(M_hat, dims.M);
  student.block(0, 0, dims.h * dims.n, dims.M) = t.theta;
  F.block(0, 0, dims.M, dims.M) = Mat::Identity(dims.M, dims.M);
  CHECK(module_alignment(t, student, F).alignment ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("linear decodability on a perfectly decodable embedding") {
  RngState rng(7);
  const int T = 80, d = 6, M = 4;
  Mat W = random_mat(d, M, rng);
  Mat masks(T, M);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < M; ++j)
      masks(i, j) = (rng.next_u64() % 2 == 0) ? 1.0 : 0.0;
  // embeddings chosen so that a linear read-back exists: emb = masks * W^+
  Mat emb = masks * W.completeOrthogonalDecomposition().pseudoInverse();
  DecodeReport rep = linear_decodability(emb, masks, emb, masks);
  CHECK(rep.r2_val == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.r2_ood == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_FALSE(rep.flagged);
  CHECK(rep.weights.rows() == d + 1);  // intercept row
}

TEST_CASE("linear decodability drops for shuffled targets") {
  RngState rng(8);
  const int T = 120, d = 5, M = 3;
  Mat emb = random_mat(T, d, rng);
  Mat masks(T, M);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < M; ++j)
      masks(i, j) = (rng.next_u64() % 2 == 0) ? 1.0 : 0.0;
  DecodeReport rep = linear_decodability(emb, masks, emb, masks);
  CHECK(rep.r2_val < 0.5);  // random embeddings carry no mask information
}

TEST_CASE("linear decodability flags constant mask columns") {
  RngState rng(9);
  const int T = 40, d = 4, M = 3;
  Mat emb = random_mat(T, d, rng);
  Mat masks = Mat::Zero(T, M);
  masks.col(0).setOnes();  // module 0 always on: no variance to explain
  for (int i = 0; i < T; ++i) masks(i, 1) = (rng.next_u64() % 2) ? 1.0 : 0.0;
  for (int i = 0; i < T; ++i) masks(i, 2) = (rng.next_u64() % 2) ? 1.0 : 0.0;
  DecodeReport rep = linear_decodability(emb, masks, emb, masks);
  CHECK(rep.flagged);
}

TEST_CASE("accuracy wrapper") {
  Mat pred(2, 3), target(2, 3);
  pred << 1, 2, 0, 5, 1, 1;
  target << 0, 1, 0, 1, 0, 0;
  CHECK(accuracy(pred, target) == doctest::Approx(1.0));
  target(0, 1) = 0;
  target(0, 0) = 1;
  CHECK(accuracy(pred, target) == doctest::Approx(0.5));
}

TEST_CASE("report serialization carries the headline numbers") {
  RngState rng(10);
  TheoryDims dims{3, 4, 4, 2};
  Teacher t = make_teacher(dims, rng);
  AlignmentReport rep =
      module_alignment(t, t.theta, Mat::Identity(dims.M, dims.M));
  Json j = alignment_report_to_json(rep);
  CHECK(j.at("alignment").get<double>() == doctest::Approx(1.0));

  Mat emb = random_mat(10, 3, rng), masks = Mat::Ones(10, 2);
  for (int i = 0; i < 10; ++i) masks(i, 0) = double(i % 2);
  DecodeReport d = linear_decodability(emb, masks, emb, masks);
  Json jd = decode_report_to_json(d);
  CHECK(jd.contains("r2_val"));
  CHECK(jd.contains("r2_ood"));
  CHECK(jd.contains("flagged"));
}
