/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <map>

#include "modlab/trainer.hpp"

namespace modlab {

struct HyperteacherSpec {
  int M = 8;
  int K = 2;
  int n = 16;
  int h = 32;
  int o = 8;
  int L_t = 3;  // teacher depth
  std::string split = "compositional";  // also noncompositional, connected,
                                        // disconnected
  double frac = 0.75;
  int shots = 256;  // samples per support and query set
  bool per_layer_masks = false;
};

/// Multi-layer linear-hypernetwork teacher with per-output-neuron moment
/// normalization folded into its forward pass.
struct NormalizedTeacher {
  ModelDims dims;
  ParamTree shared;
  Vec mean;  // length o
  Vec stddev;
  long moment_samples = 1 << 14;
};

/// Builds and normalizes the teacher; moments estimated over random inputs
/// and tasks from the spec's mask sets. Redraws on a degenerate
/// (zero-variance) output neuron.
NormalizedTeacher make_hyperteacher(const HyperteacherSpec& spec,
                                    RngState& rng);

/// Normalized teacher outputs for a task latent z (length M).
Mat hyperteacher_forward(const NormalizedTeacher& teacher, const Vec& z,
                         const Mat& X);

std::pair<TaskMaskSet, TaskMaskSet> make_splits(const HyperteacherSpec& spec,
                                                RngState& rng);

/// Support/query episode for one mask: normalized many-hot latent, inputs
/// uniform on [-1, 1]^n, disjoint i.i.d. support and query draws.
EpisodeData make_task(const NormalizedTeacher& teacher, const TaskMask& mask,
                      int N, RngState& rng);

/// Per-layer-mask variant: an independent mask conditions each of the
/// teacher's generators (first / hidden / last). The episode's mask and
/// latent record the first-layer mask.
EpisodeData make_task_per_layer(const NormalizedTeacher& teacher,
                                const TaskMask& mask_in,
                                const TaskMask& mask_hid,
                                const TaskMask& mask_out, int N,
                                RngState& rng);

struct MaskEvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::map<int, double> accuracy_by_k;  // popcount -> mean accuracy
  std::map<int, int> tasks_by_k;
  Mat embeddings;  // one row per task (adapted fast parameters)
  Mat masks;       // matching binary mask rows
};

/// Adapts and scores one episode per mask repetition; embeddings rows are
/// the flattened emb_* leaves (hypernets), readout (ANIL), or full fast
/// tree otherwise.
MaskEvalResult evaluate_on_masks(const NormalizedTeacher& teacher,
                                 const ModelRef& model,
                                 const ParamTree& shared,
                                 const ParamTree& fast_init,
                                 const TaskMaskSet& masks,
                                 int episodes_per_mask,
                                 const TrainConfig& cfg, RngState& rng);

struct HyperteacherResult {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double ood_loss = 0.0;
  double ood_acc = 0.0;
  std::map<int, double> ood_acc_by_k;
  MaskEvalResult val_eval;  // training-distribution eval (decoder fit data)
  MaskEvalResult ood_eval;
  ParamTree shared;
  ParamTree fast_init;
  TrainLog log;
};

HyperteacherResult run_hyperteacher_experiment(const HyperteacherSpec& spec,
                                               Arch arch,
                                               const ModelDims& student_dims,
                                               const TrainConfig& cfg,
                                               uint64_t seed,
                                               int episodes_per_mask = 4);

/// CSV row mirroring the results tables: train/test/OOD accuracy plus
/// per-K OOD accuracy columns.
std::string hyperteacher_result_csv(const HyperteacherResult& r, int max_k);

}  // namespace modlab
