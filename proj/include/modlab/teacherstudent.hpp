/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/metrics.hpp"
#include "modlab/trainer.hpp"

namespace modlab {

struct TheoryDims {
  int M = 6;
  int n = 16;
  int h = 16;
  int o = 4;
};

/// Teacher with truncated-normal parameters (std 1/sqrt(M) and 1/sqrt(h)),
/// redrawn until W(Theta, z) has no colinear rows for probe latents from
/// each family (or generic probes when families is null). Throws
/// std::runtime_error when non-degeneracy is unreachable.
Teacher make_teacher(const TheoryDims& dims, RngState& rng,
                     const TaskMaskSet* families = nullptr);

/// B episodes of N input/target pairs each; tasks drawn uniformly from the
/// mask set with latents per sampler_kind, inputs uniform mean-0 unit-std.
/// Episodes carry a resample closure for infinite-data inner loops.
std::vector<EpisodeData> sample_task_batch(const Teacher& teacher,
                                           const TaskMaskSet& set, int B,
                                           int N, RngState& rng);

struct TheoryRunResult {
  double train_loss = 0.0;
  double ood_loss = 0.0;
  double alignment = 0.0;
  bool diverged = false;
  Teacher teacher;
  ParamTree shared;  // trained student
  ParamTree fast_init;
  Mat F;
  TrainLog log;
};

/// Trains the theory student on one preset at the given overparameterization
/// ratios, then measures train/OOD loss and module alignment (F regressed
/// from adapted latents on fresh validation tasks).
TheoryRunResult run_theory_cell(const std::string& preset_name, int m_ratio,
                                int h_ratio, const TrainConfig& cfg,
                                const TheoryDims& dims, uint64_t seed);

struct SweepCell {
  std::string preset;
  int m_ratio = 1;
  int h_ratio = 1;
  uint64_t seed = 0;
  double train_loss = 0.0;
  double ood_loss = 0.0;
  double alignment = 0.0;
  bool diverged = false;
};

std::vector<SweepCell> run_identification_sweep(
    const std::vector<std::string>& presets,
    const std::vector<std::pair<int, int>>& ratios,
    const std::vector<uint64_t>& seeds, const TrainConfig& cfg,
    const TheoryDims& dims);

/// CSV with header `preset,m_ratio,h_ratio,seed,train_loss,ood_loss,alignment`.
std::string sweep_to_csv(const std::vector<SweepCell>& cells);

}  // namespace modlab
