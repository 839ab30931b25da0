/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/param_tree.hpp"

namespace modlab {

enum class OptKind { kAdam, kAdamW };

struct OptHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adam/AdamW moments. Shapes mirror the parameter tree; the state alone
/// carries optimizer history.
struct OptState {
  ParamTree m;
  ParamTree v;
  long step = 0;
  OptHyper hyper;
};

OptState make_opt_state(const ParamTree& params, const OptHyper& hyper);

/// One bias-corrected Adam/AdamW update. Pure: inputs are not mutated.
/// AdamW applies decoupled weight decay scaled by the learning rate.
std::pair<OptState, ParamTree> optimizer_step(const OptState& state,
                                              const ParamTree& params,
                                              const ParamTree& grads,
                                              OptKind kind);

/// Cosine schedule: lr0 at step 0 down to lr_min at step == total; steps
/// past total clamp to lr_min.
double cosine_lr(long step, long total, double lr0, double lr_min);

}  // namespace modlab
