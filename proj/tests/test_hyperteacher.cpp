/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "modlab/hyperteacher.hpp"

using namespace modlab;

namespace {

HyperteacherSpec small_spec() {
  HyperteacherSpec s;
  s.M = 4;
  s.K = 2;
  s.n = 8;
  s.h = 12;
  s.o = 4;
  s.L_t = 2;
  s.split = "compositional";
  s.frac = 0.75;
  s.shots = 32;
  return s;
}

std::set<std::string> mask_strings(const TaskMaskSet& s) {
  std::set<std::string> out;
  for (const auto& m : s.masks) out.insert(m.str());
  return out;
}

}  // namespace

TEST_CASE("split families have the expected shapes") {
  RngState rng(1);
  HyperteacherSpec s = small_spec();
  s.M = 8;

  s.split = "noncompositional";
  auto [nc_train, nc_ood] = make_splits(s, rng);
  // train tasks never touch the held-out module; ood tasks always do
  CHECK(nc_train.masks.size() == 28);  // C(7,1) + C(7,2)
  CHECK(nc_ood.masks.size() == 8);
  int held_out = -1;
  for (int m = 0; m < 8; ++m) {
    bool touched = false;
    for (const auto& mask : nc_train.masks) touched = touched || mask.bits[m];
    if (!touched) held_out = m;
  }
  REQUIRE(held_out >= 0);
  for (const auto& mask : nc_ood.masks) CHECK(mask.bits[held_out] == 1);

  s.split = "connected";
  auto [ring_train, ring_ood] = make_splits(s, rng);
  CHECK(ring_train.masks.size() == 24);
  CHECK(is_connected(ring_train));
  s.split = "disconnected";
  auto [cl_train, cl_ood] = make_splits(s, rng);
  CHECK(cl_train.masks.size() == 20);
  CHECK_FALSE(is_connected(cl_train));
  // the two splits share the same ood probe set
  CHECK(mask_strings(ring_ood) == mask_strings(cl_ood));

  s.split = "compositional";
  s.K = 2;
  auto [c_train, c_ood] = make_splits(s, rng);
  CHECK(is_compositional(c_train));
  for (const auto& m : c_ood.masks) CHECK_FALSE(c_train.contains(m));
  for (const auto& m : c_train.masks) CHECK(m.popcount() <= 2);

  s.split = "nonsense";
  CHECK_THROWS_AS(make_splits(s, rng), std::out_of_range);
}

TEST_CASE("K=1 split holds out singletons and probes pairs") {
  RngState rng(21);
  HyperteacherSpec s = small_spec();
  s.K = 1;
  auto [train, ood] = make_splits(s, rng);
  CHECK(train.masks.size() == 3);
  CHECK(ood.masks.size() == 1 + 6);  // held-out singleton plus all pairs
  for (const auto& m : train.masks) CHECK(m.popcount() == 1);
  for (const auto& m : ood.masks) CHECK_FALSE(train.contains(m));
  CHECK_FALSE(is_compositional(train));  // the K=1 failure mode by design
  // deterministic under the same rng seed
  RngState rng2(21);
  auto [train2, ood2] = make_splits(s, rng2);
  CHECK(mask_strings(train2) == mask_strings(train));
}

TEST_CASE("teacher outputs are moment normalized over the task family") {
  RngState rng(2);
  HyperteacherSpec s = small_spec();
  NormalizedTeacher t = make_hyperteacher(s, rng);

  RngState split_rng(2);
  split_rng = split_rng.split(0);  // same lineage the constructor uses
  auto [train, ood] = make_splits(s, split_rng);
  TaskMaskSet all = train;
  for (const auto& m : ood.masks)
    if (!all.contains(m)) all.masks.push_back(m);

  RngState mc(5);
  const int n_draws = 40000;
  Vec sum = Vec::Zero(s.o), sumsq = Vec::Zero(s.o);
  for (int i = 0; i < n_draws; i += 50) {
    const TaskMask& mask = all.masks[mc.next_u64() % all.masks.size()];
    Vec z = sample_discrete(mask).z;
    Mat X(50, s.n);
    for (int r = 0; r < 50; ++r)
      for (int c = 0; c < s.n; ++c) X(r, c) = mc.uniform(-1.0, 1.0);
    Mat y = hyperteacher_forward(t, z, X);
    for (int r = 0; r < 50; ++r)
      for (int c = 0; c < s.o; ++c) {
        sum[c] += y(r, c);
        sumsq[c] += y(r, c) * y(r, c);
      }
  }
  for (int c = 0; c < s.o; ++c) {
    const double mean = sum[c] / n_draws;
    const double var = sumsq[c] / n_draws - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.1);
  }
}

TEST_CASE("episodes have the right shapes and discrete latents") {
  RngState rng(3);
  HyperteacherSpec s = small_spec();
  NormalizedTeacher t = make_hyperteacher(s, rng);
  TaskMask mask = TaskMask::from_string("1010");
  RngState ep_rng(7);
  EpisodeData ep = make_task(t, mask, 24, ep_rng);
  CHECK(ep.support_x.rows() == 24);
  CHECK(ep.support_x.cols() == s.n);
  CHECK(ep.support_y.cols() == s.o);
  CHECK(ep.query_x.rows() == 24);
  // latent is the normalized many-hot vector
  const double e = 1.0 / std::sqrt(2.0);
  CHECK(ep.latent(0) == doctest::Approx(e));
  CHECK(ep.latent(1) == 0.0);
  CHECK(ep.latent(2) == doctest::Approx(e));
  CHECK(ep.latent(3) == 0.0);
  // support and query draws are disjoint
  CHECK((ep.support_x - ep.query_x).norm() > 0.0);
  // labels are reproducible from the forward pass
  Mat y = hyperteacher_forward(t, ep.latent, ep.support_x);
  CHECK((y - ep.support_y).norm() == 0.0);
}

TEST_CASE("per-layer masks change the labels but keep the episode contract") {
  RngState rng(4);
  HyperteacherSpec s = small_spec();
  NormalizedTeacher t = make_hyperteacher(s, rng);
  TaskMask a = TaskMask::from_string("1100");
  TaskMask b = TaskMask::from_string("0011");
  RngState r1(11), r2(11);
  EpisodeData same = make_task_per_layer(t, a, a, a, 16, r1);
  EpisodeData mixed = make_task_per_layer(t, a, b, b, 16, r2);
  CHECK(same.support_x.rows() == 16);
  CHECK((same.latent - mixed.latent).norm() == 0.0);  // records the in-mask
  CHECK((same.support_x - mixed.support_x).norm() == 0.0);
  CHECK((same.support_y - mixed.support_y).norm() > 1e-6);
  // all-equal per-layer masks reproduce the single-mask task labels
  RngState r3(11);
  EpisodeData plain = make_task(t, a, 16, r3);
  CHECK((same.support_y - plain.support_y).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("evaluate_on_masks reports one row per episode") {
  RngState rng(5);
  HyperteacherSpec s = small_spec();
  NormalizedTeacher t = make_hyperteacher(s, rng);
  RngState split_rng = RngState(5).split(0);
  auto [train, ood] = make_splits(s, split_rng);

  ModelDims sd{s.n, s.o, 16, 2, s.M, 0};
  ModelRef model{Arch::kLinearHnet, sd};
  RngState init_rng(13);
  ModelInit init = init_model(Arch::kLinearHnet, sd, init_rng);

  TrainConfig cfg;
  cfg.B_inner = 16;
  cfg.N_inner = 3;
  cfg.lr_inner = 0.01;
  cfg.loss = LossKind::kKlLogSoftmax;

  RngState eval_rng(17);
  MaskEvalResult res =
      evaluate_on_masks(t, model, init.shared, init.fast_init, ood, 2, cfg,
                        eval_rng);
  const long rows = long(ood.masks.size()) * 2;
  CHECK(res.embeddings.rows() == rows);
  CHECK(res.masks.rows() == rows);
  CHECK(res.masks.cols() == s.M);
  for (long i = 0; i < res.masks.rows(); ++i)
    for (int j = 0; j < s.M; ++j)
      CHECK((res.masks(i, j) == 0.0 || res.masks(i, j) == 1.0));
  CHECK(res.accuracy >= 0.0);
  CHECK(res.accuracy <= 1.0);
  int count = 0;
  for (const auto& [k, n] : res.tasks_by_k) count += n;
  CHECK(count == rows);
}

TEST_CASE("experiment smoke run is finite and deterministic") {
  HyperteacherSpec s = small_spec();
  s.shots = 24;
  ModelDims sd{s.n, s.o, 16, 2, s.M, 0};

  TrainConfig cfg;
  cfg.B_outer = 2;
  cfg.B_inner = 24;
  cfg.N_outer = 12;
  cfg.N_inner = 4;
  cfg.lr_inner = 0.01;
  cfg.lr_outer = 0.003;
  cfg.cosine = false;
  cfg.log_every = 4;
  cfg.seed = 5;

  HyperteacherResult a =
      run_hyperteacher_experiment(s, Arch::kLinearHnet, sd, cfg, 99, 1);
  HyperteacherResult b =
      run_hyperteacher_experiment(s, Arch::kLinearHnet, sd, cfg, 99, 1);
  CHECK(std::isfinite(a.train_loss));
  CHECK(a.ood_acc >= 0.0);
  CHECK(a.ood_acc <= 1.0);
  CHECK(a.ood_acc == b.ood_acc);
  CHECK((a.shared.flatten() - b.shared.flatten()).norm() == 0.0);
  CHECK(a.log.records.size() >= 2);

  std::string csv = hyperteacher_result_csv(a, s.K);
  CHECK(csv.rfind("train_acc,test_acc,ood_acc,ood_acc_k1,ood_acc_k2", 0) == 0);
}
