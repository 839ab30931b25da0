/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/optim.hpp"

#include <cmath>

namespace modlab {

OptState make_opt_state(const ParamTree& params, const OptHyper& hyper) {
  OptState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  s.step = 0;
  s.hyper = hyper;
  return s;
}

std::pair<OptState, ParamTree> optimizer_step(const OptState& state,
                                              const ParamTree& params,
                                              const ParamTree& grads,
                                              OptKind kind) {
  if (!params.same_shape(grads))
    throw std::invalid_argument("optimizer_step: grads/params shape mismatch");
  if (!params.same_shape(state.m))
    throw std::invalid_argument("optimizer_step: state/params shape mismatch");

  const OptHyper& h = state.hyper;
  OptState next = state;
  next.step = state.step + 1;
  ParamTree out = params;

  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(next.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(next.step));

  auto mi = next.m.leaves.begin();
  auto vi = next.v.leaves.begin();
  auto pi = out.leaves.begin();
  auto gi = grads.leaves.begin();
  for (; pi != out.leaves.end(); ++pi, ++gi, ++mi, ++vi) {
    const Mat& g = gi->second;
    mi->second = h.beta1 * mi->second + (1.0 - h.beta1) * g;
    vi->second = h.beta2 * vi->second + (1.0 - h.beta2) * g.cwiseProduct(g);
    Mat m_hat = mi->second / bc1;
    Mat v_hat = vi->second / bc2;
    Mat update =
        m_hat.array() / (v_hat.array().sqrt() + h.eps);
    if (kind == OptKind::kAdamW && h.weight_decay != 0.0)
      pi->second -= h.lr * h.weight_decay * pi->second;
    pi->second -= h.lr * update.matrix();
  }
  return {std::move(next), std::move(out)};
}

double cosine_lr(long step, long total, double lr0, double lr_min) {
  if (total <= 0) throw std::invalid_argument("cosine_lr: total must be > 0");
  if (step < 0) throw std::invalid_argument("cosine_lr: negative step");
  if (step >= total) return lr_min;
  const double t = static_cast<double>(step) / static_cast<double>(total);
  return lr_min + 0.5 * (lr0 - lr_min) *
                      (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace modlab
