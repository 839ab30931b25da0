/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/models.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "modlab/graph.hpp"

namespace modlab {

Arch arch_from_string(const std::string& s) {
  if (s == "linear_hnet_theory") return Arch::kLinearHnetTheory;
  if (s == "linear_hnet") return Arch::kLinearHnet;
  if (s == "nonlinear_hnet") return Arch::kNonlinearHnet;
  if (s == "maml") return Arch::kMaml;
  if (s == "anil") return Arch::kAnil;
  throw std::out_of_range("unknown architecture: " + s);
}

std::string to_string(Arch a) {
  switch (a) {
    case Arch::kLinearHnetTheory: return "linear_hnet_theory";
    case Arch::kLinearHnet: return "linear_hnet";
    case Arch::kNonlinearHnet: return "nonlinear_hnet";
    case Arch::kMaml: return "maml";
    case Arch::kAnil: return "anil";
  }
  return "?";
}

Mat generate_W(const Mat& theta, const Vec& z, int h, int n) {
  if (theta.rows() != static_cast<long>(h) * n || theta.cols() != z.size())
    throw std::invalid_argument("generate_W: shape mismatch");
  Vec flat = theta * z;
  Mat W(h, n);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < n; ++j) W(i, j) = flat[i * n + j];
  return W;
}

Mat teacher_forward(const Teacher& t, const Vec& z, const Mat& X) {
  if (X.cols() != t.n)
    throw std::invalid_argument("teacher_forward: input dim mismatch");
  Mat W = generate_W(t.theta, z, t.h, t.n);
  Mat pre = X * W.transpose() / std::sqrt(static_cast<double>(t.n));
  return pre.cwiseMax(0.0) * t.a;
}

namespace {

using ad::Tape;

struct LeafIds {
  std::map<std::string, int> shared;
  std::map<std::string, int> fast;
};

// Base ReLU MLP over tape nodes. W[l] is out x in; ntk divides each
// pre-activation by sqrt(fan-in).
int base_net(Tape& t, int x, const std::vector<int>& W,
             const std::vector<int>& B, bool ntk,
             const std::vector<int>& fan_in) {
  int a = x;
  for (size_t l = 0; l < W.size(); ++l) {
    int pre = t.matmul(a, t.transpose(W[l]));
    if (ntk) pre = t.scale(pre, 1.0 / std::sqrt(double(fan_in[l])));
    if (!B.empty()) pre = t.add_rowvec(pre, B[l]);
    if (l + 1 < W.size()) a = t.relu(pre);
    else a = pre;
  }
  return a;
}

// 4-layer ELU generator with layer normalization on the input and before
// each activation. emb is M x 1; returns the flat T x 1 weight vector.
int nonlinear_generator(Tape& t, int emb, const std::vector<int>& w,
                        const std::vector<int>& b) {
  int a = t.layernorm_rows(t.transpose(t.l2_normalize(emb)));
  for (int l = 0; l < 4; ++l) {
    int z = t.add_rowvec(t.matmul(a, w[l]), b[l]);
    a = (l < 3) ? t.elu(t.layernorm_rows(z)) : z;
  }
  return t.transpose(a);
}

int build_forward(Tape& t, Arch arch, const ModelDims& d,
                  const ParamTree& shared, const ParamTree& fast, const Mat& X,
                  bool want_shared, bool want_fast, LeafIds& ids) {
  auto leaf_s = [&](const std::string& name) {
    int id = want_shared ? t.param(shared.at(name)) : t.constant(shared.at(name));
    ids.shared[name] = id;
    return id;
  };
  auto leaf_f = [&](const std::string& name) {
    int id = want_fast ? t.param(fast.at(name)) : t.constant(fast.at(name));
    ids.fast[name] = id;
    return id;
  };
  const int x = t.constant(X);

  switch (arch) {
    case Arch::kLinearHnetTheory: {
      int theta = leaf_s("theta");
      int readout = leaf_s("readout");
      int z = leaf_f("z");
      int W = t.reshape(t.matmul(theta, z), d.h, d.n);
      int pre = t.scale(t.matmul(x, t.transpose(W)),
                        1.0 / std::sqrt(double(d.n)));
      return t.matmul(t.relu(pre), readout);
    }
    case Arch::kLinearHnet:
    case Arch::kNonlinearHnet: {
      std::vector<int> W, B, fan;
      auto flat_weights = [&](const std::string& gen) -> int {
        if (arch == Arch::kLinearHnet)
          return t.matmul(leaf_s("gen_" + gen),
                          t.l2_normalize(leaf_f("emb_" + gen)));
        std::vector<int> w, b;
        for (int l = 1; l <= 4; ++l) {
          w.push_back(leaf_s("gen_" + gen + "_w" + std::to_string(l)));
          b.push_back(leaf_s("gen_" + gen + "_b" + std::to_string(l)));
        }
        return nonlinear_generator(t, leaf_f("emb_" + gen), w, b);
      };
      W.push_back(t.reshape(flat_weights("in"), d.h, d.n));
      fan.push_back(d.n);
      if (d.L >= 2) {
        int flat_hid = flat_weights("hid");
        for (int l = 2; l <= d.L; ++l) {
          W.push_back(t.reshape(
              t.block(flat_hid, long(l - 2) * d.h * d.h, 0, long(d.h) * d.h, 1),
              d.h, d.h));
          fan.push_back(d.h);
        }
      }
      W.push_back(t.reshape(flat_weights("out"), d.o, d.h));
      fan.push_back(d.h);
      for (int l = 1; l <= d.L; ++l) B.push_back(leaf_f("b" + std::to_string(l)));
      B.push_back(leaf_f("bout"));
      return base_net(t, x, W, B, /*ntk=*/true, fan);
    }
    case Arch::kMaml: {
      std::vector<int> W, B, fan;
      for (int l = 1; l <= d.L; ++l) {
        W.push_back(leaf_f("w" + std::to_string(l)));
        B.push_back(leaf_f("b" + std::to_string(l)));
        fan.push_back(l == 1 ? d.n : d.h);
      }
      W.push_back(leaf_f("wout"));
      B.push_back(leaf_f("bout"));
      fan.push_back(d.h);
      return base_net(t, x, W, B, /*ntk=*/false, fan);
    }
    case Arch::kAnil: {
      std::vector<int> W, B, fan;
      for (int l = 1; l <= d.L; ++l) {
        W.push_back(leaf_s("w" + std::to_string(l)));
        B.push_back(leaf_s("b" + std::to_string(l)));
        fan.push_back(l == 1 ? d.n : d.h);
      }
      // body features, then the fast readout
      int a = x;
      for (size_t l = 0; l < W.size(); ++l)
        a = t.relu(t.add_rowvec(t.matmul(a, t.transpose(W[l])), B[l]));
      return t.add_rowvec(t.matmul(a, t.transpose(leaf_f("rw"))),
                          leaf_f("rb"));
    }
  }
  throw std::logic_error("unreachable");
}

ParamTree collect_grads(const Tape& t, const std::map<std::string, int>& ids,
                        const ParamTree& ref) {
  ParamTree out;
  for (const auto& [name, id] : ids) {
    if (t.has_grad(id))
      out.set(name, t.grad(id));
    else
      out.set(name, Mat::Zero(ref.at(name).rows(), ref.at(name).cols()));
  }
  return out;
}

}  // namespace

Mat student_forward(Arch arch, const ModelDims& dims, const ParamTree& shared,
                    const ParamTree& fast, const Mat& X) {
  Tape t;
  LeafIds ids;
  int pred = build_forward(t, arch, dims, shared, fast, X, false, false, ids);
  return t.value(pred);
}

LossGrads model_loss(Arch arch, const ModelDims& dims, LossKind loss,
                     const ParamTree& shared, const ParamTree& fast,
                     const Batch& batch, bool want_shared, bool want_fast) {
  Tape t;
  LeafIds ids;
  int pred = build_forward(t, arch, dims, shared, fast, batch.x, want_shared,
                           want_fast, ids);
  LossGrads out;
  out.pred = t.value(pred);
  out.loss = loss_eval(loss, out.pred, batch.y);
  if (want_shared || want_fast) {
    if (t.needs_grad(pred)) t.backward(pred, loss_grad(loss, out.pred, batch.y));
    if (want_shared) out.d_shared = collect_grads(t, ids.shared, shared);
    if (want_fast) out.d_fast = collect_grads(t, ids.fast, fast);
  }
  return out;
}

ParamTree merge_params(const ParamTree& shared, const ParamTree& fast) {
  ParamTree out;
  for (const auto& [k, v] : shared.leaves) out.set("s:" + k, v);
  for (const auto& [k, v] : fast.leaves) out.set("f:" + k, v);
  return out;
}

void split_params(const ParamTree& merged, ParamTree* shared,
                  ParamTree* fast) {
  for (const auto& [k, v] : merged.leaves) {
    if (k.rfind("s:", 0) == 0)
      shared->set(k.substr(2), v);
    else if (k.rfind("f:", 0) == 0)
      fast->set(k.substr(2), v);
    else
      throw std::invalid_argument("split_params: unprefixed leaf " + k);
  }
}

void register_model(Arch arch, const ModelDims& dims) {
  for (LossKind kind :
       {LossKind::kMse, LossKind::kKlLogSoftmax, LossKind::kXent}) {
    std::string id = to_string(arch) + "/" + to_string(kind);
    register_function(id, [arch, dims, kind](const ParamTree& params,
                                             const Batch& batch) {
      ParamTree shared, fast;
      split_params(params, &shared, &fast);
      // MAML ignores the shared tree in its forward pass; its merged
      // gradient is zero there.
      bool ws = arch != Arch::kMaml;
      LossGrads g = model_loss(arch, dims, kind, shared, fast, batch, ws, true);
      ParamTree grads = params.zeros_like();
      if (ws)
        for (const auto& [k, v] : g.d_shared.leaves) grads.at("s:" + k) = v;
      for (const auto& [k, v] : g.d_fast.leaves) grads.at("f:" + k) = v;
      return std::make_pair(g.loss, std::move(grads));
    });
  }
}

ModelInit init_model(Arch arch, const ModelDims& d, RngState& rng) {
  ModelInit out;
  auto normal_vec = [&](int len) {
    Mat m(len, 1);
    for (int i = 0; i < len; ++i) m(i, 0) = rng.normal();
    return m;
  };
  switch (arch) {
    case Arch::kLinearHnetTheory: {
      out.shared.set("theta", trunc_normal_init(d.h * d.n, d.M,
                                                1.0 / std::sqrt(double(d.M)),
                                                rng));
      out.shared.set("readout",
                     trunc_normal_init(d.h, d.o, 1.0 / std::sqrt(double(d.h)),
                                       rng));
      out.fast_init.set("z", normal_vec(d.M));
      return out;
    }
    case Arch::kLinearHnet: {
      const double std_gen = 1.0 / std::sqrt(double(d.M));
      out.shared.set("gen_in", trunc_normal_init(d.h * d.n, d.M, std_gen, rng));
      if (d.L >= 2)
        out.shared.set("gen_hid", trunc_normal_init((d.L - 1) * d.h * d.h, d.M,
                                                    std_gen, rng));
      out.shared.set("gen_out", trunc_normal_init(d.o * d.h, d.M, std_gen, rng));
      out.shared.set("init_emb_in", uniform_unit_variance_init(d.M, 1, rng));
      if (d.L >= 2)
        out.shared.set("init_emb_hid", uniform_unit_variance_init(d.M, 1, rng));
      out.shared.set("init_emb_out", uniform_unit_variance_init(d.M, 1, rng));
      for (int l = 1; l <= d.L; ++l)
        out.shared.set("init_b" + std::to_string(l), Mat::Zero(1, d.h));
      out.shared.set("init_bout", Mat::Zero(1, d.o));
      out.fast_init = fast_init_from_shared(arch, out.shared);
      return out;
    }
    case Arch::kNonlinearHnet: {
      const int g = d.gen_hidden();
      auto generator = [&](const std::string& name, int target) {
        std::string p = "gen_" + name + "_";
        out.shared.set(p + "w1", trunc_normal_init(
                                     d.M, g, 1.0 / std::sqrt(double(d.M)), rng));
        out.shared.set(p + "w2",
                       trunc_normal_init(g, g, 1.0 / std::sqrt(double(g)), rng));
        out.shared.set(p + "w3",
                       trunc_normal_init(g, g, 1.0 / std::sqrt(double(g)), rng));
        out.shared.set(p + "w4", trunc_normal_init(
                                     g, target, 1.0 / std::sqrt(double(g)), rng));
        for (int l = 1; l <= 3; ++l)
          out.shared.set(p + "b" + std::to_string(l), Mat::Zero(1, g));
        out.shared.set(p + "b4", Mat::Zero(1, target));
      };
      generator("in", d.h * d.n);
      if (d.L >= 2) generator("hid", (d.L - 1) * d.h * d.h);
      generator("out", d.o * d.h);
      out.shared.set("init_emb_in", uniform_unit_variance_init(d.M, 1, rng));
      if (d.L >= 2)
        out.shared.set("init_emb_hid", uniform_unit_variance_init(d.M, 1, rng));
      out.shared.set("init_emb_out", uniform_unit_variance_init(d.M, 1, rng));
      for (int l = 1; l <= d.L; ++l)
        out.shared.set("init_b" + std::to_string(l), Mat::Zero(1, d.h));
      out.shared.set("init_bout", Mat::Zero(1, d.o));
      out.fast_init = fast_init_from_shared(arch, out.shared);
      return out;
    }
    case Arch::kMaml: {
      out.shared.set("w1", trunc_normal_init(d.h, d.n,
                                             1.0 / std::sqrt(double(d.n)), rng));
      out.shared.set("b1", Mat::Zero(1, d.h));
      for (int l = 2; l <= d.L; ++l) {
        out.shared.set("w" + std::to_string(l),
                       trunc_normal_init(d.h, d.h, 1.0 / std::sqrt(double(d.h)),
                                         rng));
        out.shared.set("b" + std::to_string(l), Mat::Zero(1, d.h));
      }
      out.shared.set("wout", trunc_normal_init(
                                 d.o, d.h, 1.0 / std::sqrt(double(d.h)), rng));
      out.shared.set("bout", Mat::Zero(1, d.o));
      out.fast_init = out.shared;
      return out;
    }
    case Arch::kAnil: {
      out.shared.set("w1", trunc_normal_init(d.h, d.n,
                                             1.0 / std::sqrt(double(d.n)), rng));
      out.shared.set("b1", Mat::Zero(1, d.h));
      for (int l = 2; l <= d.L; ++l) {
        out.shared.set("w" + std::to_string(l),
                       trunc_normal_init(d.h, d.h, 1.0 / std::sqrt(double(d.h)),
                                         rng));
        out.shared.set("b" + std::to_string(l), Mat::Zero(1, d.h));
      }
      out.shared.set("init_rw", trunc_normal_init(
                                    d.o, d.h, 1.0 / std::sqrt(double(d.h)), rng));
      out.shared.set("init_rb", Mat::Zero(1, d.o));
      out.fast_init = fast_init_from_shared(arch, out.shared);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

ParamTree fast_init_from_shared(Arch arch, const ParamTree& shared) {
  ParamTree fast;
  switch (arch) {
    case Arch::kLinearHnetTheory:
      throw std::invalid_argument(
          "fast_init_from_shared: theory student uses a random fast init");
    case Arch::kLinearHnet:
    case Arch::kNonlinearHnet:
      for (const auto& [k, v] : shared.leaves)
        if (k.rfind("init_", 0) == 0) fast.set(k.substr(5), v);
      return fast;
    case Arch::kMaml:
      return shared;
    case Arch::kAnil:
      fast.set("rw", shared.at("init_rw"));
      fast.set("rb", shared.at("init_rb"));
      return fast;
  }
  throw std::logic_error("unreachable");
}

ModelDims default_dims(const std::string& experiment, Arch arch) {
  ModelDims d;
  if (experiment == "theory") {
    d.n = 16;
    d.o = 4;
    d.h = 16;
    d.L = 1;
    d.M = 6;
    return d;
  }
  if (experiment == "hyperteacher") {
    d.n = 16;
    d.o = 8;
    switch (arch) {
      case Arch::kLinearHnet:
      case Arch::kNonlinearHnet:
        d.L = 3;
        d.h = 128;
        d.M = 32;
        return d;
      case Arch::kMaml:
        d.L = 3;
        d.h = 368;
        return d;
      case Arch::kAnil:
        d.L = 3;
        d.h = 512;
        return d;
      default:
        break;
    }
    throw std::out_of_range("default_dims: no hyperteacher entry for " +
                            to_string(arch));
  }
  if (experiment == "prefgrid") {
    // 5x5 grid, planes: walls + 8 colors + agent; 5 actions
    d.n = 250;
    d.o = 5;
    switch (arch) {
      case Arch::kLinearHnet:
        d.L = 3;
        d.h = 64;
        d.M = 32;
        return d;
      case Arch::kNonlinearHnet:
        d.L = 2;
        d.h = 64;
        d.M = 32;
        return d;
      case Arch::kMaml:
        d.L = 3;
        d.h = 368;
        return d;
      case Arch::kAnil:
        d.L = 4;
        d.h = 512;
        return d;
      default:
        break;
    }
    throw std::out_of_range("default_dims: no prefgrid entry for " +
                            to_string(arch));
  }
  if (experiment == "compgrid") {
    // 11x11 maze, planes: walls + 5 object types + agent; 6 actions
    d.n = 847;
    d.o = 6;
    switch (arch) {
      case Arch::kLinearHnet:
      case Arch::kNonlinearHnet:
        d.L = 2;
        d.h = 32;
        d.M = 8;
        return d;
      case Arch::kMaml:
        d.L = 2;
        d.h = 384;
        return d;
      case Arch::kAnil:
        d.L = 2;
        d.h = 512;
        return d;
      default:
        break;
    }
    throw std::out_of_range("default_dims: no compgrid entry for " +
                            to_string(arch));
  }
  throw std::out_of_range("default_dims: unknown experiment " + experiment);
}

}  // namespace modlab
