/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modlab/expcli.hpp"
#include "modlab/gridworlds.hpp"
#include "modlab/metrics.hpp"
#include "modlab/teacherstudent.hpp"
#include "modlab/theorylab.hpp"

namespace py = pybind11;
using namespace modlab;

namespace {

TaskMask mask_from_list(const std::vector<int>& bits) {
  TaskMask m;
  for (int b : bits) m.bits.push_back(b ? 1 : 0);
  return m;
}

TaskMaskSet set_from_lists(const std::vector<std::vector<int>>& masks) {
  TaskMaskSet s;
  s.M = masks.empty() ? 0 : int(masks[0].size());
  for (const auto& m : masks) s.masks.push_back(mask_from_list(m));
  return s;
}

std::map<std::string, Mat> tree_to_map(const ParamTree& t) {
  std::map<std::string, Mat> out;
  for (const auto& [k, v] : t.leaves) out[k] = v;
  return out;
}

ParamTree map_to_tree(const std::map<std::string, Mat>& m) {
  ParamTree t;
  for (const auto& [k, v] : m) t.leaves[k] = v;
  return t;
}

}  // namespace

PYBIND11_MODULE(_modlab, mod) {
  mod.doc() = "modular meta-learning laboratory (C++ core)";
  mod.attr("__version__") = kCodeVersion;

  // task space
  mod.def(
      "sample_continuous",
      [](const std::vector<int>& mask, uint64_t seed) {
        RngState rng(seed);
        return sample_continuous(mask_from_list(mask), rng).z;
      },
      py::arg("mask"), py::arg("seed"));
  mod.def("sample_discrete", [](const std::vector<int>& mask) {
    return sample_discrete(mask_from_list(mask)).z;
  });
  mod.def("enumerate_masks", [](int M, int K) {
    std::vector<std::vector<int>> out;
    for (const auto& m : enumerate_masks(M, K).masks)
      out.emplace_back(m.bits.begin(), m.bits.end());
    return out;
  });
  mod.def("is_compositional", [](const std::vector<std::vector<int>>& masks) {
    return is_compositional(set_from_lists(masks));
  });
  mod.def("is_connected", [](const std::vector<std::vector<int>>& masks) {
    return is_connected(set_from_lists(masks));
  });
  mod.def(
      "preset_masks",
      [](const std::string& name, uint64_t seed) {
        RngState rng(seed);
        Preset p = preset(name, rng);
        auto conv = [](const TaskMaskSet& s) {
          std::vector<std::vector<int>> out;
          for (const auto& m : s.masks)
            out.emplace_back(m.bits.begin(), m.bits.end());
          return out;
        };
        return py::make_tuple(conv(p.train), conv(p.ood));
      },
      py::arg("name"), py::arg("seed") = 0);

  // models
  mod.def(
      "default_dims",
      [](const std::string& experiment, const std::string& arch) {
        ModelDims d = default_dims(experiment, arch_from_string(arch));
        return py::dict(py::arg("n") = d.n, py::arg("o") = d.o,
                        py::arg("h") = d.h, py::arg("L") = d.L,
                        py::arg("M") = d.M);
      },
      py::arg("experiment"), py::arg("arch"));
  mod.def(
      "init_model",
      [](const std::string& arch, int n, int o, int h, int L, int M,
         uint64_t seed) {
        RngState rng(seed);
        ModelDims d{n, o, h, L, M, 0};
        ModelInit init = init_model(arch_from_string(arch), d, rng);
        return py::make_tuple(tree_to_map(init.shared),
                              tree_to_map(init.fast_init));
      },
      py::arg("arch"), py::arg("n"), py::arg("o"), py::arg("h"), py::arg("L"),
      py::arg("M"), py::arg("seed"));
  mod.def(
      "student_forward",
      [](const std::string& arch, int n, int o, int h, int L, int M,
         const std::map<std::string, Mat>& shared,
         const std::map<std::string, Mat>& fast, const Mat& X) {
        ModelDims d{n, o, h, L, M, 0};
        return student_forward(arch_from_string(arch), d, map_to_tree(shared),
                               map_to_tree(fast), X);
      },
      py::arg("arch"), py::arg("n"), py::arg("o"), py::arg("h"), py::arg("L"),
      py::arg("M"), py::arg("shared"), py::arg("fast"), py::arg("X"));

  // metrics
  mod.def("fit_linear_map", [](const Mat& z_hat, const Mat& z) {
    return fit_linear_map(z_hat, z);
  });
  mod.def(
      "module_alignment",
      [](const Mat& theta, const Mat& a, int M, int n, int h, int o,
         const Mat& student_theta, const Mat& F) {
        Teacher t;
        t.theta = theta;
        t.a = a;
        t.M = M;
        t.n = n;
        t.h = h;
        t.o = o;
        return module_alignment(t, student_theta, F).alignment;
      },
      py::arg("theta"), py::arg("a"), py::arg("M"), py::arg("n"),
      py::arg("h"), py::arg("o"), py::arg("student_theta"), py::arg("F"));

  // gridworlds
  mod.def("pref_obs_dim", [] { return kPrefObsDim; });
  mod.def("goal_obs_dim", [] { return kGoalObsDim; });

  // experiments: JSON-string config in, JSON-string metrics out
  mod.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& out_dir) {
        ExperimentConfig cfg = parse_config(Json::parse(config_json));
        RunOutcome out = run_experiment(cfg, out_dir);
        return py::make_tuple(out.exit_code, out.metrics.dump());
      },
      py::arg("config_json"), py::arg("out_dir"));
  mod.def(
      "run_check",
      [](uint64_t seed, const std::string& out_dir) {
        RunOutcome out = run_check(seed, out_dir);
        return py::make_tuple(out.exit_code, out.metrics.dump());
      },
      py::arg("seed"), py::arg("out_dir"));
  mod.def("config_hash", [](const std::string& config_json) {
    return config_hash(parse_config(Json::parse(config_json)));
  });
}
