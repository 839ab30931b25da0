/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace modlab {

namespace {

constexpr double kDivergeThreshold = 1e6;

bool bad(double loss) { return !std::isfinite(loss) || loss > kDivergeThreshold; }

Batch support_batch(const EpisodeData& ep, const TrainConfig& cfg,
                    RngState& rng) {
  if (ep.resample) return ep.resample(rng);
  const long n = ep.support_x.rows();
  if (cfg.B_inner <= 0 || cfg.B_inner >= n)
    return Batch{ep.support_x, ep.support_y};
  Batch b;
  b.x.resize(cfg.B_inner, ep.support_x.cols());
  b.y.resize(cfg.B_inner, ep.support_y.cols());
  for (int i = 0; i < cfg.B_inner; ++i) {
    long j = static_cast<long>(rng.next_u64() % static_cast<uint64_t>(n));
    b.x.row(i) = ep.support_x.row(j);
    b.y.row(i) = ep.support_y.row(j);
  }
  return b;
}

}  // namespace

std::string TrainLog::to_csv() const {
  std::ostringstream ss;
  ss << "step,loss_inner,loss_outer,accuracy,lr,seconds\n";
  ss.precision(17);
  for (const auto& r : records)
    ss << r.step << "," << r.loss_inner << "," << r.loss_outer << ","
       << r.accuracy << "," << r.lr << "," << r.seconds << "\n";
  return ss.str();
}

ParamTree adapt(const ModelRef& model, const ParamTree& shared,
                const ParamTree& fast_init, const EpisodeData& support,
                const TrainConfig& cfg, RngState& rng, double* final_loss) {
  if (cfg.N_inner < 1)
    throw std::invalid_argument("adapt: N_inner must be >= 1");
  OptHyper hyper;
  hyper.lr = cfg.lr_inner;
  hyper.weight_decay = cfg.wd_inner;
  ParamTree fast = fast_init;
  OptState opt = make_opt_state(fast, hyper);
  double loss = 0.0;
  for (int s = 0; s < cfg.N_inner; ++s) {
    Batch b = support_batch(support, cfg, rng);
    LossGrads g = model_loss(model.arch, model.dims, cfg.loss, shared, fast, b,
                             /*want_shared=*/false, /*want_fast=*/true);
    loss = g.loss;
    if (bad(loss)) throw Diverged(s);
    auto [next_opt, next_fast] =
        optimizer_step(opt, fast, g.d_fast, cfg.inner_kind);
    opt = std::move(next_opt);
    fast = std::move(next_fast);
  }
  if (final_loss) *final_loss = loss;
  return fast;
}

OuterResult outer_step(const ModelRef& model, const ParamTree& shared,
                       const OptState& opt, const ParamTree& fast_init,
                       const std::vector<EpisodeData>& tasks,
                       const TrainConfig& cfg, long step, RngState& rng) {
  ParamTree grad_sum = shared.zeros_like();
  OuterMetrics metrics;
  for (size_t k = 0; k < tasks.size(); ++k) {
    RngState task_rng = rng.split(k);
    double inner_loss = 0.0;
    ParamTree fast =
        adapt(model, shared, fast_init, tasks[k], cfg, task_rng, &inner_loss);
    Batch query{tasks[k].query_x, tasks[k].query_y};
    const bool maml = model.arch == Arch::kMaml;
    LossGrads g = model_loss(model.arch, model.dims, cfg.loss, shared, fast,
                             query, /*want_shared=*/!maml, /*want_fast=*/true);
    if (bad(g.loss)) throw Diverged(step);
    // first-order outer gradient: partials at the adapted fast parameters;
    // for MAML the adapted-parameter gradient is applied to theta = phi_0
    const ParamTree& g_outer = maml ? g.d_fast : g.d_shared;
    for (const auto& [name, dv] : g_outer.leaves) grad_sum.at(name) += dv;
    // meta-learn fast initializations: the query partial at the adapted
    // value stands in for the partial at the init (first order)
    if (!maml)
      for (const auto& [name, dv] : g.d_fast.leaves)
        if (auto it = grad_sum.leaves.find("init_" + name);
            it != grad_sum.leaves.end())
          it->second += dv;
    metrics.loss_inner += inner_loss;
    metrics.loss_outer += g.loss;
    metrics.accuracy += argmax_accuracy(g.pred, query.y);
  }
  const double nt = static_cast<double>(tasks.size());
  metrics.loss_inner /= nt;
  metrics.loss_outer /= nt;
  metrics.accuracy /= nt;

  if (cfg.grad_clip > 0.0) grad_sum = clip_global_norm(grad_sum, cfg.grad_clip);
  OptState o = opt;
  o.hyper.lr = cfg.cosine
                   ? cosine_lr(step, cfg.N_outer, cfg.lr_outer, cfg.lr_min)
                   : cfg.lr_outer;
  auto [next_opt, next_shared] =
      optimizer_step(o, shared, grad_sum, cfg.outer_kind);
  return OuterResult{std::move(next_shared), std::move(next_opt),
                     std::move(metrics)};
}

TrainResult train(const ModelRef& model, const ModelInit& init,
                  const TaskSource& source, const TrainConfig& cfg) {
  OptHyper hyper;
  hyper.lr = cfg.lr_outer;
  hyper.weight_decay = cfg.wd_outer;
  ParamTree shared = init.shared;
  ParamTree fast_init = init.fast_init;
  // architectures whose fast init lives in the shared tree as init_* leaves
  // meta-learn it; rebuild the fast init from the updated shared tree
  const bool learned_init = model.arch == Arch::kLinearHnet ||
                            model.arch == Arch::kNonlinearHnet ||
                            model.arch == Arch::kAnil;
  OptState opt = make_opt_state(shared, hyper);
  RngState root(cfg.seed);
  TrainLog log;
  const auto t0 = std::chrono::steady_clock::now();
  for (long step = 0; step < cfg.N_outer; ++step) {
    RngState step_rng = root.split(static_cast<uint64_t>(step));
    RngState data_rng = step_rng.split(0);
    RngState inner_rng = step_rng.split(1);
    std::vector<EpisodeData> tasks = source(step, data_rng);
    if (static_cast<int>(tasks.size()) != cfg.B_outer)
      throw std::invalid_argument("train: task source returned wrong count");
    OuterResult r =
        outer_step(model, shared, opt, fast_init, tasks, cfg, step,
                   inner_rng);
    shared = std::move(r.shared);
    opt = std::move(r.opt);
    if (learned_init) fast_init = fast_init_from_shared(model.arch, shared);
    if (step % cfg.log_every == 0 || step == cfg.N_outer - 1) {
      TrainRecord rec;
      rec.step = step;
      rec.loss_inner = r.metrics.loss_inner;
      rec.loss_outer = r.metrics.loss_outer;
      rec.accuracy = r.metrics.accuracy;
      rec.lr = cfg.cosine
                   ? cosine_lr(step, cfg.N_outer, cfg.lr_outer, cfg.lr_min)
                   : cfg.lr_outer;
      rec.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      log.records.push_back(rec);
    }
  }
  return TrainResult{std::move(shared), std::move(fast_init), std::move(log)};
}

EvalResult evaluate(const ModelRef& model, const ParamTree& shared,
                    const ParamTree& fast_init,
                    const std::vector<EpisodeData>& tasks,
                    const TrainConfig& cfg, RngState& rng) {
  EvalResult out;
  for (size_t k = 0; k < tasks.size(); ++k) {
    RngState task_rng = rng.split(k);
    ParamTree fast =
        adapt(model, shared, fast_init, tasks[k], cfg, task_rng, nullptr);
    Batch query{tasks[k].query_x, tasks[k].query_y};
    LossGrads g = model_loss(model.arch, model.dims, cfg.loss, shared, fast,
                             query, false, false);
    out.loss += g.loss;
    out.accuracy += argmax_accuracy(g.pred, query.y);
    out.adapted.push_back(std::move(fast));
  }
  const double nt = static_cast<double>(tasks.size());
  out.loss /= nt;
  out.accuracy /= nt;
  return out;
}

}  // namespace modlab
