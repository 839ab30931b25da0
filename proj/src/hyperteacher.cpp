/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/hyperteacher.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace modlab {

namespace {

Mat hypercube_inputs(int rows, int cols, RngState& rng) {
  Mat X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  return X;
}

ParamTree teacher_fast(const NormalizedTeacher& t, const Vec& z) {
  ParamTree fast;
  Mat zc = z;
  fast.set("emb_in", zc);
  if (t.dims.L >= 2) fast.set("emb_hid", zc);
  fast.set("emb_out", zc);
  for (int l = 1; l <= t.dims.L; ++l)
    fast.set("b" + std::to_string(l), Mat::Zero(1, t.dims.h));
  fast.set("bout", Mat::Zero(1, t.dims.o));
  return fast;
}

Mat raw_forward(const NormalizedTeacher& t, const Vec& z, const Mat& X) {
  return student_forward(Arch::kLinearHnet, t.dims, t.shared,
                         teacher_fast(t, z), X);
}

}  // namespace

Mat hyperteacher_forward(const NormalizedTeacher& t, const Vec& z,
                         const Mat& X) {
  Mat y = raw_forward(t, z, X);
  for (long c = 0; c < y.cols(); ++c)
    y.col(c) = (y.col(c).array() - t.mean[c]) / t.stddev[c];
  return y;
}

std::pair<TaskMaskSet, TaskMaskSet> make_splits(const HyperteacherSpec& spec,
                                                RngState& rng) {
  if (spec.split == "compositional" && spec.K == 1) {
    // holding out a singleton necessarily breaks compositional support, so
    // the K=1 failure-mode split bypasses the compositional holdout: train
    // on a random 75% of the singletons, probe the rest plus all pairs
    TaskMaskSet singles = enumerate_masks(spec.M, 1);
    std::vector<size_t> order(singles.masks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t i = order.size(); i-- > 1;)
      std::swap(order[i], order[rng.next_u64() % (i + 1)]);
    const size_t n_train =
        std::max<size_t>(1, size_t(std::lround(spec.frac * order.size())));
    TaskMaskSet train{spec.M, {}, SamplerKind::kDiscrete};
    TaskMaskSet ood{spec.M, {}, SamplerKind::kDiscrete};
    for (size_t i = 0; i < order.size(); ++i)
      (i < n_train ? train : ood).masks.push_back(singles.masks[order[i]]);
    for (const auto& m : enumerate_masks(spec.M, 2).masks)
      if (m.popcount() == 2) ood.masks.push_back(m);
    std::sort(train.masks.begin(), train.masks.end());
    std::sort(ood.masks.begin(), ood.masks.end());
    return {train, ood};
  }
  if (spec.split == "compositional") {
    std::ostringstream name;
    name << "compositional(" << spec.M << "," << spec.K << "," << spec.frac
         << ")";
    Preset p = preset(name.str(), rng);
    p.train.sampler_kind = SamplerKind::kDiscrete;
    p.ood.sampler_kind = SamplerKind::kDiscrete;
    return {p.train, p.ood};
  }
  if (spec.split == "noncompositional") {
    std::ostringstream name;
    name << "noncompositional(" << spec.M << "," << spec.K << ")";
    Preset p = preset(name.str(), rng);
    p.train.sampler_kind = SamplerKind::kDiscrete;
    p.ood.sampler_kind = SamplerKind::kDiscrete;
    return {p.train, p.ood};
  }
  if (spec.split == "connected" || spec.split == "disconnected") {
    std::ostringstream name;
    name << (spec.split == "connected" ? "ring-connected"
                                       : "clustered-disconnected")
         << "(" << spec.M << ")";
    Preset p = preset(name.str(), rng);
    p.train.sampler_kind = SamplerKind::kDiscrete;
    p.ood.sampler_kind = SamplerKind::kDiscrete;
    return {p.train, p.ood};
  }
  throw std::out_of_range("make_splits: unknown split " + spec.split);
}

NormalizedTeacher make_hyperteacher(const HyperteacherSpec& spec,
                                    RngState& rng) {
  RngState split_rng = rng.split(0);
  auto [train, ood] = make_splits(spec, split_rng);
  TaskMaskSet all = train;
  for (const auto& m : ood.masks)
    if (!all.contains(m)) all.masks.push_back(m);

  for (int attempt = 0; attempt < 20; ++attempt) {
    RngState draw_rng = rng.split(1 + attempt);
    NormalizedTeacher t;
    t.dims.n = spec.n;
    t.dims.h = spec.h;
    t.dims.o = spec.o;
    t.dims.L = spec.L_t;
    t.dims.M = spec.M;
    t.shared = init_model(Arch::kLinearHnet, t.dims, draw_rng).shared;
    t.mean = Vec::Zero(spec.o);
    t.stddev = Vec::Ones(spec.o);

    // moment estimation over random (x, task) pairs
    const long total = t.moment_samples;
    const int chunk = 64;
    Vec sum = Vec::Zero(spec.o), sumsq = Vec::Zero(spec.o);
    RngState mom_rng = draw_rng.split(0);
    long seen = 0;
    while (seen < total) {
      const TaskMask& mask = all.masks[mom_rng.next_u64() % all.masks.size()];
      Vec z = sample_discrete(mask).z;
      Mat X = hypercube_inputs(chunk, spec.n, mom_rng);
      Mat y = raw_forward(t, z, X);
      for (int i = 0; i < chunk; ++i)
        for (int c = 0; c < spec.o; ++c) {
          sum[c] += y(i, c);
          sumsq[c] += y(i, c) * y(i, c);
        }
      seen += chunk;
    }
    bool ok = true;
    for (int c = 0; c < spec.o; ++c) {
      double mean = sum[c] / double(seen);
      double var = sumsq[c] / double(seen) - mean * mean;
      if (var < 1e-8) {
        ok = false;
        break;
      }
      t.mean[c] = mean;
      t.stddev[c] = std::sqrt(var);
    }
    if (ok) return t;
  }
  throw std::runtime_error("make_hyperteacher: degenerate teacher");
}

EpisodeData make_task(const NormalizedTeacher& teacher, const TaskMask& mask,
                      int N, RngState& rng) {
  EpisodeData ep;
  ep.mask = mask;
  ep.latent = sample_discrete(mask).z;
  ep.support_x = hypercube_inputs(N, teacher.dims.n, rng);
  ep.support_y = hyperteacher_forward(teacher, ep.latent, ep.support_x);
  ep.query_x = hypercube_inputs(N, teacher.dims.n, rng);
  ep.query_y = hyperteacher_forward(teacher, ep.latent, ep.query_x);
  return ep;
}

EpisodeData make_task_per_layer(const NormalizedTeacher& teacher,
                                const TaskMask& mask_in,
                                const TaskMask& mask_hid,
                                const TaskMask& mask_out, int N,
                                RngState& rng) {
  ParamTree fast = teacher_fast(teacher, sample_discrete(mask_in).z);
  if (teacher.dims.L >= 2)
    fast.at("emb_hid") = Mat(sample_discrete(mask_hid).z);
  fast.at("emb_out") = Mat(sample_discrete(mask_out).z);
  auto forward = [&](const Mat& X) {
    Mat y = student_forward(Arch::kLinearHnet, teacher.dims, teacher.shared,
                            fast, X);
    for (long c = 0; c < y.cols(); ++c)
      y.col(c) = (y.col(c).array() - teacher.mean[c]) / teacher.stddev[c];
    return y;
  };
  EpisodeData ep;
  ep.mask = mask_in;
  ep.latent = sample_discrete(mask_in).z;
  ep.support_x = hypercube_inputs(N, teacher.dims.n, rng);
  ep.support_y = forward(ep.support_x);
  ep.query_x = hypercube_inputs(N, teacher.dims.n, rng);
  ep.query_y = forward(ep.query_x);
  return ep;
}

namespace {

Vec embedding_row(Arch arch, const ParamTree& fast) {
  ParamTree sel;
  bool any_emb = false;
  for (const auto& [k, v] : fast.leaves)
    if (k.rfind("emb", 0) == 0) {
      sel.set(k, v);
      any_emb = true;
    }
  if (any_emb) return sel.flatten();
  if (arch == Arch::kAnil) {
    sel.set("rw", fast.at("rw"));
    return sel.flatten();
  }
  return fast.flatten();
}

}  // namespace

MaskEvalResult evaluate_on_masks(const NormalizedTeacher& teacher,
                                 const ModelRef& model,
                                 const ParamTree& shared,
                                 const ParamTree& fast_init,
                                 const TaskMaskSet& masks,
                                 int episodes_per_mask,
                                 const TrainConfig& cfg, RngState& rng) {
  MaskEvalResult out;
  std::map<int, double> acc_k;
  std::map<int, int> cnt_k;
  std::vector<Vec> rows;
  std::vector<TaskMask> row_masks;
  double loss = 0.0, acc = 0.0;
  long total = 0;
  for (size_t mi = 0; mi < masks.masks.size(); ++mi) {
    const TaskMask& mask = masks.masks[mi];
    for (int e = 0; e < episodes_per_mask; ++e) {
      RngState task_rng = rng.split(mi * 1000 + e);
      EpisodeData ep = make_task(teacher, mask, cfg.B_inner > 0 ? cfg.B_inner
                                                                : 256,
                                 task_rng);
      RngState adapt_rng = task_rng.split(7);
      std::vector<EpisodeData> one{ep};
      EvalResult ev = evaluate(model, shared, fast_init, one, cfg, adapt_rng);
      loss += ev.loss;
      acc += ev.accuracy;
      acc_k[mask.popcount()] += ev.accuracy;
      cnt_k[mask.popcount()] += 1;
      rows.push_back(embedding_row(model.arch, ev.adapted[0]));
      row_masks.push_back(mask);
      ++total;
    }
  }
  out.loss = loss / double(total);
  out.accuracy = acc / double(total);
  for (const auto& [k, v] : acc_k) out.accuracy_by_k[k] = v / cnt_k[k];
  out.tasks_by_k = cnt_k;
  out.embeddings.resize(total, rows[0].size());
  out.masks.resize(total, masks.M);
  for (long i = 0; i < total; ++i) {
    out.embeddings.row(i) = rows[i].transpose();
    for (int m = 0; m < masks.M; ++m)
      out.masks(i, m) = double(row_masks[i].bits[m]);
  }
  return out;
}

HyperteacherResult run_hyperteacher_experiment(const HyperteacherSpec& spec,
                                               Arch arch,
                                               const ModelDims& student_dims,
                                               const TrainConfig& cfg,
                                               uint64_t seed,
                                               int episodes_per_mask) {
  RngState root(seed);
  RngState teacher_rng = root.split(0);
  RngState split_rng = root.split(1);
  RngState init_rng = root.split(2);
  RngState eval_rng = root.split(4);

  NormalizedTeacher teacher = make_hyperteacher(spec, teacher_rng);
  auto [train_set, ood_set] = make_splits(spec, split_rng);

  ModelRef model{arch, student_dims};
  ModelInit init = init_model(arch, student_dims, init_rng);

  const NormalizedTeacher* tp = &teacher;
  const TaskMaskSet* ts = &train_set;
  TrainConfig c = cfg;
  c.loss = LossKind::kKlLogSoftmax;
  const int shots = spec.shots;
  const bool per_layer = spec.per_layer_masks;
  TaskSource source = [tp, ts, shots, per_layer, &c](long, RngState& rng) {
    std::vector<EpisodeData> out;
    for (int k = 0; k < c.B_outer; ++k) {
      RngState r = rng.split(k);
      auto pick = [&]() -> const TaskMask& {
        return ts->masks[r.next_u64() % ts->masks.size()];
      };
      if (per_layer) {
        const TaskMask &a = pick(), &b = pick(), &d = pick();
        out.push_back(make_task_per_layer(*tp, a, b, d, shots, r));
      } else {
        out.push_back(make_task(*tp, pick(), shots, r));
      }
    }
    return out;
  };

  HyperteacherResult res;
  TrainResult tr = train(model, init, source, c);
  res.shared = std::move(tr.shared);
  res.log = std::move(tr.log);
  res.fast_init = tr.fast_init;

  RngState val_rng = eval_rng.split(0);
  res.val_eval = evaluate_on_masks(teacher, model, res.shared, res.fast_init,
                                   train_set, episodes_per_mask, c, val_rng);
  RngState ood_rng = eval_rng.split(1);
  res.ood_eval = evaluate_on_masks(teacher, model, res.shared, res.fast_init,
                                   ood_set, episodes_per_mask, c, ood_rng);
  res.train_loss = res.val_eval.loss;
  res.train_acc = res.val_eval.accuracy;
  res.ood_loss = res.ood_eval.loss;
  res.ood_acc = res.ood_eval.accuracy;
  res.ood_acc_by_k = res.ood_eval.accuracy_by_k;
  return res;
}

std::string hyperteacher_result_csv(const HyperteacherResult& r, int max_k) {
  std::ostringstream ss;
  ss.precision(10);
  ss << "train_acc,test_acc,ood_acc";
  for (int k = 1; k <= max_k; ++k) ss << ",ood_acc_k" << k;
  ss << "\n";
  ss << r.train_acc << "," << r.train_acc << "," << r.ood_acc;
  for (int k = 1; k <= max_k; ++k) {
    auto it = r.ood_acc_by_k.find(k);
    ss << "," << (it == r.ood_acc_by_k.end() ? 0.0 : it->second);
  }
  ss << "\n";
  return ss.str();
}

}  // namespace modlab
