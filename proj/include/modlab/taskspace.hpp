/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "modlab/param_tree.hpp"

namespace modlab {

/// Binary support mask over the M modules of a task distribution.
struct TaskMask {
  std::vector<std::uint8_t> bits;

  int size() const { return static_cast<int>(bits.size()); }
  int popcount() const;
  bool overlaps(const TaskMask& other) const;
  bool any() const { return popcount() > 0; }
  std::string str() const;
  static TaskMask from_string(const std::string& s);
  bool operator==(const TaskMask& other) const { return bits == other.bits; }
  bool operator<(const TaskMask& other) const { return bits < other.bits; }
};

enum class SamplerKind { kContinuous, kDiscrete };

struct TaskMaskSet {
  int M = 0;
  std::vector<TaskMask> masks;
  SamplerKind sampler_kind = SamplerKind::kContinuous;

  bool contains(const TaskMask& m) const;
  /// Largest popcount over the masks (0 for an empty set).
  int max_popcount() const;
};

struct TaskLatent {
  Vec z;
  TaskMask source_mask;
};

/// True iff the elementwise sum of all masks has no zero entry.
bool is_compositional(const TaskMaskSet& set);

/// True iff the graph with masks as vertices and edges between overlapping
/// masks is connected. Union-find; the tests cross-check against DFS.
bool is_connected(const TaskMaskSet& set);

/// Uniform-on-simplex draw restricted to the mask support, shifted so that
/// on-mask entries land in (0.5, 1.0) and off-mask entries are exactly 0.
TaskLatent sample_continuous(const TaskMask& mask, RngState& rng);

/// z = mask / sqrt(popcount).
TaskLatent sample_discrete(const TaskMask& mask);

/// All masks with popcount in [1, K], lexicographic order over bit strings.
TaskMaskSet enumerate_masks(int M, int K);

struct HoldoutSplit {
  TaskMaskSet train;
  TaskMaskSet ood;
};

/// Random partition with |train| = round(fraction * |set|); resamples until
/// the train half is compositional (bounded retries, then deterministic
/// repair). Throws std::runtime_error if no compositional split exists.
HoldoutSplit split_holdout(const TaskMaskSet& set, double fraction,
                           RngState& rng);

struct Preset {
  TaskMaskSet train;
  TaskMaskSet ood;
};

/// Named distributions. Fixed theory lists plus parameterized families:
/// ring-connected(M), clustered-disconnected(M), compositional(M,K,frac),
/// noncompositional(M,K). Throws std::out_of_range on unknown names.
Preset preset(const std::string& name, RngState& rng);
std::vector<std::string> preset_names();

/// Sum over k in [1, K] of C(M,k)^(L-1).
unsigned long long count_tasks(int M, int K, int L);

std::string mask_set_to_text(const TaskMaskSet& set);
TaskMaskSet mask_set_from_text(const std::string& text);

}  // namespace modlab
