/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <functional>
#include <optional>

#include "modlab/models.hpp"
#include "modlab/optim.hpp"
#include "modlab/taskspace.hpp"

namespace modlab {

struct TrainConfig {
  int B_outer = 1;
  int B_inner = 0;  // 0 -> full batch
  long N_outer = 1;
  int N_inner = 1;
  double lr_inner = 1e-3;
  double lr_outer = 1e-3;
  double wd_inner = 0.0;
  double wd_outer = 0.0;
  double grad_clip = 0.0;  // 0 -> off
  bool cosine = false;
  double lr_min = 1e-6;
  OptKind inner_kind = OptKind::kAdam;
  OptKind outer_kind = OptKind::kAdamW;
  LossKind loss = LossKind::kMse;
  uint64_t seed = 0;
  int log_every = 100;
};

/// Support and query data for one task. When `resample` is set the inner
/// loop draws a fresh support batch from it each step (infinite-data mode).
struct EpisodeData {
  Mat support_x, support_y;
  Mat query_x, query_y;
  Vec latent;     // ground-truth task latent, may be empty
  TaskMask mask;  // source mask, may be empty
  std::function<Batch(RngState&)> resample;
};

/// B_outer episodes for one outer step.
using TaskSource =
    std::function<std::vector<EpisodeData>(long step, RngState& rng)>;

struct Diverged : std::runtime_error {
  long step;
  explicit Diverged(long s)
      : std::runtime_error("loss diverged at step " + std::to_string(s)),
        step(s) {}
};

struct TrainRecord {
  long step = 0;
  double loss_inner = 0.0;
  double loss_outer = 0.0;
  double accuracy = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::string to_csv() const;
};

struct ModelRef {
  Arch arch;
  ModelDims dims;
};

/// Inner-loop adaptation: N_inner optimizer steps on the support loss
/// starting from fast_init. Pure; throws Diverged on non-finite loss.
ParamTree adapt(const ModelRef& model, const ParamTree& shared,
                const ParamTree& fast_init, const EpisodeData& support,
                const TrainConfig& cfg, RngState& rng,
                double* final_loss = nullptr);

struct OuterMetrics {
  double loss_inner = 0.0;
  double loss_outer = 0.0;
  double accuracy = 0.0;
};

struct OuterResult {
  ParamTree shared;
  OptState opt;
  OuterMetrics metrics;
};

/// One outer step of the bilevel procedure: adapt per task, accumulate
/// first-order outer gradients at the adapted fast parameters, clip, and
/// apply the outer optimizer with the scheduled learning rate.
OuterResult outer_step(const ModelRef& model, const ParamTree& shared,
                       const OptState& opt, const ParamTree& fast_init,
                       const std::vector<EpisodeData>& tasks,
                       const TrainConfig& cfg, long step, RngState& rng);

struct TrainResult {
  ParamTree shared;
  ParamTree fast_init;
  TrainLog log;
};

TrainResult train(const ModelRef& model, const ModelInit& init,
                  const TaskSource& source, const TrainConfig& cfg);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<ParamTree> adapted;  // per-task fast parameters
};

/// Fresh adaptation per task from fast_init, then the query loss. Pure.
EvalResult evaluate(const ModelRef& model, const ParamTree& shared,
                    const ParamTree& fast_init,
                    const std::vector<EpisodeData>& tasks,
                    const TrainConfig& cfg, RngState& rng);

}  // namespace modlab
