/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/teacherstudent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "modlab/theorylab.hpp"

namespace modlab {

namespace {

Mat uniform_inputs(int rows, int cols, RngState& rng) {
  const double b = std::sqrt(3.0);
  Mat X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = rng.uniform(-b, b);
  return X;
}

Vec draw_latent(const TaskMaskSet& set, const TaskMask& mask, RngState& rng) {
  if (set.sampler_kind == SamplerKind::kDiscrete)
    return sample_discrete(mask).z;
  return sample_continuous(mask, rng).z;
}

}  // namespace

Teacher make_teacher(const TheoryDims& dims, RngState& rng,
                     const TaskMaskSet* families) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Teacher t;
    t.M = dims.M;
    t.n = dims.n;
    t.h = dims.h;
    t.o = dims.o;
    t.theta = trunc_normal_init(dims.h * dims.n, dims.M,
                                1.0 / std::sqrt(double(dims.M)), rng);
    t.a = trunc_normal_init(dims.h, dims.o, 1.0 / std::sqrt(double(dims.h)),
                            rng);
    bool ok = true;
    if (families) {
      for (const auto& mask : families->masks) {
        Vec z = draw_latent(*families, mask, rng);
        if (!rows_noncolinear(generate_W(t.theta, z, t.h, t.n))) {
          ok = false;
          break;
        }
      }
    } else {
      TaskMask full;
      full.bits.assign(dims.M, 1);
      for (int probe = 0; probe < 10 && ok; ++probe) {
        Vec z = sample_continuous(full, rng).z;
        if (!rows_noncolinear(generate_W(t.theta, z, t.h, t.n))) ok = false;
      }
    }
    if (ok) return t;
  }
  throw std::runtime_error("make_teacher: degenerate teacher after retries");
}

std::vector<EpisodeData> sample_task_batch(const Teacher& teacher,
                                           const TaskMaskSet& set, int B,
                                           int N, RngState& rng) {
  if (set.masks.empty())
    throw std::invalid_argument("sample_task_batch: empty mask set");
  std::vector<EpisodeData> out;
  out.reserve(B);
  for (int k = 0; k < B; ++k) {
    const TaskMask& mask =
        set.masks[rng.next_u64() % set.masks.size()];
    Vec z = draw_latent(set, mask, rng);
    EpisodeData ep;
    ep.mask = mask;
    ep.latent = z;
    ep.support_x = uniform_inputs(N, teacher.n, rng);
    ep.support_y = teacher_forward(teacher, z, ep.support_x);
    ep.query_x = uniform_inputs(N, teacher.n, rng);
    ep.query_y = teacher_forward(teacher, z, ep.query_x);
    const Teacher* tp = &teacher;
    const int n = teacher.n;
    ep.resample = [tp, z, N, n](RngState& r) {
      Batch b;
      b.x = uniform_inputs(N, n, r);
      b.y = teacher_forward(*tp, z, b.x);
      return b;
    };
    out.push_back(std::move(ep));
  }
  return out;
}

TheoryRunResult run_theory_cell(const std::string& preset_name, int m_ratio,
                                int h_ratio, const TrainConfig& cfg,
                                const TheoryDims& dims, uint64_t seed) {
  RngState root(seed);
  RngState teacher_rng = root.split(0);
  RngState preset_rng = root.split(1);
  RngState init_rng = root.split(2);
  RngState eval_rng = root.split(3);

  Preset p = preset(preset_name, preset_rng);
  TheoryRunResult res;
  res.teacher = make_teacher(dims, teacher_rng, &p.train);

  ModelDims sd;
  sd.n = dims.n;
  sd.o = dims.o;
  sd.h = dims.h * h_ratio;
  sd.L = 1;
  sd.M = dims.M * m_ratio;
  ModelRef model{Arch::kLinearHnetTheory, sd};
  ModelInit init = init_model(Arch::kLinearHnetTheory, sd, init_rng);

  const Teacher* teacher = &res.teacher;
  const TaskMaskSet* train_set = &p.train;
  TrainConfig c = cfg;
  const int N = c.B_inner > 0 ? c.B_inner : 256;
  TaskSource source = [teacher, train_set, N, &c](long, RngState& rng) {
    return sample_task_batch(*teacher, *train_set, c.B_outer, N, rng);
  };

  try {
    TrainResult tr = train(model, init, source, c);
    res.shared = std::move(tr.shared);
    res.log = std::move(tr.log);
  } catch (const Diverged&) {
    res.diverged = true;
    res.train_loss = std::numeric_limits<double>::quiet_NaN();
    res.ood_loss = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  res.fast_init = init.fast_init;

  // train-distribution loss and adapted latents for the alignment map
  const int n_val = 64;
  RngState val_rng = eval_rng.split(0);
  std::vector<EpisodeData> val =
      sample_task_batch(*teacher, p.train, n_val, N, val_rng);
  RngState val_adapt_rng = eval_rng.split(1);
  EvalResult ev = evaluate(model, res.shared, init.fast_init, val, c,
                           val_adapt_rng);
  res.train_loss = ev.loss;

  Mat z_hat(n_val, sd.M), z_true(n_val, dims.M);
  for (int i = 0; i < n_val; ++i) {
    z_hat.row(i) = ev.adapted[i].at("z").col(0).transpose();
    z_true.row(i) = val[i].latent.transpose();
  }
  res.F = fit_linear_map(z_hat, z_true);
  res.alignment =
      module_alignment(res.teacher, res.shared.at("theta"), res.F).alignment;

  if (!p.ood.masks.empty()) {
    RngState ood_rng = eval_rng.split(2);
    std::vector<EpisodeData> ood =
        sample_task_batch(*teacher, p.ood, n_val, N, ood_rng);
    RngState ood_adapt_rng = eval_rng.split(3);
    res.ood_loss =
        evaluate(model, res.shared, init.fast_init, ood, c, ood_adapt_rng)
            .loss;
  }
  return res;
}

std::vector<SweepCell> run_identification_sweep(
    const std::vector<std::string>& presets,
    const std::vector<std::pair<int, int>>& ratios,
    const std::vector<uint64_t>& seeds, const TrainConfig& cfg,
    const TheoryDims& dims) {
  std::vector<SweepCell> cells;
  for (const auto& preset_name : presets)
    for (const auto& [mr, hr] : ratios)
      for (uint64_t seed : seeds) {
        SweepCell cell;
        cell.preset = preset_name;
        cell.m_ratio = mr;
        cell.h_ratio = hr;
        cell.seed = seed;
        TheoryRunResult r =
            run_theory_cell(preset_name, mr, hr, cfg, dims, seed);
        cell.train_loss = r.train_loss;
        cell.ood_loss = r.ood_loss;
        cell.alignment = r.alignment;
        cell.diverged = r.diverged;
        cells.push_back(std::move(cell));
      }
  return cells;
}

std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "preset,m_ratio,h_ratio,seed,train_loss,ood_loss,alignment\n";
  for (const auto& c : cells)
    ss << c.preset << "," << c.m_ratio << "," << c.h_ratio << "," << c.seed
       << "," << c.train_loss << "," << c.ood_loss << "," << c.alignment
       << "\n";
  return ss.str();
}

}  // namespace modlab
