/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/expcli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "modlab/gridworlds.hpp"
#include "modlab/hyperteacher.hpp"
#include "modlab/metrics.hpp"
#include "modlab/teacherstudent.hpp"
#include "modlab/theorylab.hpp"

namespace fs = std::filesystem;

namespace modlab {

const char* kCodeVersion = "modlab 0.1.0";

namespace {

// key -> expected scalar kind: s(tring), i(nteger), f(loat), b(ool)
const std::map<std::string, char>& known_keys() {
  static const std::map<std::string, char> k = {
      {"experiment", 's'}, {"arch", 's'},        {"preset", 's'},
      {"seed", 'i'},       {"n_seeds", 'i'},     {"b_outer", 'i'},
      {"b_inner", 'i'},    {"n_outer", 'i'},     {"n_inner", 'i'},
      {"lr_inner", 'f'},   {"lr_outer", 'f'},    {"wd_inner", 'f'},
      {"wd_outer", 'f'},   {"grad_clip", 'f'},   {"cosine", 'b'},
      {"loss", 's'},       {"log_every", 'i'},   {"m_ratio", 'i'},
      {"h_ratio", 'i'},    {"teacher_m", 'i'},   {"teacher_n", 'i'},
      {"teacher_h", 'i'},  {"teacher_o", 'i'},   {"M", 'i'},
      {"K", 'i'},          {"frac", 'f'},        {"shots", 'i'},
      {"per_layer_masks", 'b'},                  {"episodes_per_mask", 'i'},
      {"teacher_depth", 'i'},
      {"student_h", 'i'},  {"student_m", 'i'},   {"student_l", 'i'},
      {"n_instances", 'i'},                      {"eval_tasks", 'i'},
  };
  return k;
}

bool scalar_matches(char kind, const Json& v) {
  switch (kind) {
    case 's': return v.is_string();
    case 'i': return v.is_number_integer();
    case 'f': return v.is_number();
    case 'b': return v.is_boolean();
  }
  return false;
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
  return buf;
}

void emit_json(const std::string& dir, const std::string& name, const Json& j,
               std::vector<std::string>* files) {
  write_json_file(dir + "/" + name, j);
  files->push_back(name);
}

void emit_text(const std::string& dir, const std::string& name,
               const std::string& text, std::vector<std::string>* files) {
  write_text_file(dir + "/" + name, text);
  files->push_back(name);
}

ModelDims student_dims(const ExperimentConfig& cfg,
                       const std::string& experiment, Arch arch) {
  ModelDims d = default_dims(experiment, arch);
  d.h = int(cfg.get_long("student_h", d.h));
  d.M = int(cfg.get_long("student_m", d.M));
  d.L = int(cfg.get_long("student_l", d.L));
  return d;
}

Json metrics_theory(const TheoryRunResult& r) {
  return Json{{"train_loss", r.train_loss},
              {"ood_loss", r.ood_loss},
              {"alignment", r.alignment},
              {"diverged", r.diverged}};
}

void run_theory(const ExperimentConfig& cfg, const std::string& dir,
                RunOutcome* out) {
  TheoryDims dims;
  dims.M = int(cfg.get_long("teacher_m", dims.M));
  dims.n = int(cfg.get_long("teacher_n", dims.n));
  dims.h = int(cfg.get_long("teacher_h", dims.h));
  dims.o = int(cfg.get_long("teacher_o", dims.o));
  TheoryRunResult r = run_theory_cell(
      cfg.get_string("preset", "theory-discrete-connected"),
      int(cfg.get_long("m_ratio", 1)), int(cfg.get_long("h_ratio", 1)),
      cfg.train_config(), dims, uint64_t(cfg.get_long("seed", 0)));
  out->metrics = metrics_theory(r);
  emit_text(dir, "train_log.csv", r.log.to_csv(), &out->files);
  Checkpoint ckpt;
  ckpt.params = r.shared;
  ckpt.meta = Json{{"arch", "linear_hnet_theory"}};
  save_checkpoint(dir + "/checkpoint.json", ckpt);
  out->files.push_back("checkpoint.json");
  if (r.diverged) {
    out->exit_code = kExitDiverged;
    out->error = "training diverged";
  }
}

void run_hyper(const ExperimentConfig& cfg, const std::string& dir,
               RunOutcome* out) {
  HyperteacherSpec spec;
  spec.M = int(cfg.get_long("M", spec.M));
  spec.K = int(cfg.get_long("K", spec.K));
  spec.n = int(cfg.get_long("teacher_n", spec.n));
  spec.h = int(cfg.get_long("teacher_h", spec.h));
  spec.o = int(cfg.get_long("teacher_o", spec.o));
  spec.L_t = int(cfg.get_long("teacher_depth", spec.L_t));
  spec.frac = cfg.get_double("frac", spec.frac);
  spec.shots = int(cfg.get_long("shots", spec.shots));
  spec.split = cfg.get_string("preset", spec.split);
  spec.per_layer_masks = cfg.get_bool("per_layer_masks", false);
  Arch arch = arch_from_string(cfg.get_string("arch", "linear_hnet"));
  ModelDims sd = student_dims(cfg, "hyperteacher", arch);
  sd.n = spec.n;  // the student interface follows the teacher family
  sd.o = spec.o;
  HyperteacherResult r = run_hyperteacher_experiment(
      spec, arch, sd, cfg.train_config(),
      uint64_t(cfg.get_long("seed", 0)),
      int(cfg.get_long("episodes_per_mask", 4)));
  DecodeReport dec =
      linear_decodability(r.val_eval.embeddings, r.val_eval.masks,
                          r.ood_eval.embeddings, r.ood_eval.masks);
  Json m{{"train_loss", r.train_loss}, {"train_acc", r.train_acc},
         {"ood_loss", r.ood_loss},     {"ood_acc", r.ood_acc},
         {"r2_val", dec.r2_val},       {"r2_ood", dec.r2_ood}};
  for (const auto& [k, acc] : r.ood_acc_by_k)
    m["ood_acc_k" + std::to_string(k)] = acc;
  out->metrics = m;
  emit_text(dir, "train_log.csv", r.log.to_csv(), &out->files);
  Checkpoint ckpt;
  ckpt.params = r.shared;
  ckpt.meta = Json{{"arch", to_string(arch)}};
  save_checkpoint(dir + "/checkpoint.json", ckpt);
  out->files.push_back("checkpoint.json");
}

/// Shared trainer harness for the two gridworld experiments.
void run_grid(const ExperimentConfig& cfg, const std::string& experiment,
              const std::string& dir, RunOutcome* out) {
  const uint64_t seed = uint64_t(cfg.get_long("seed", 0));
  RngState root(seed);
  RngState env_rng = root.split(0);
  RngState split_rng = root.split(1);
  RngState init_rng = root.split(2);
  RngState eval_rng = root.split(3);

  Arch arch = arch_from_string(cfg.get_string("arch", "linear_hnet"));
  ModelDims dims = student_dims(cfg, experiment, arch);
  TrainConfig tc = cfg.train_config();
  const int eval_tasks = int(cfg.get_long("eval_tasks", 16));

  TaskSource source;
  std::function<std::vector<EpisodeData>(int, RngState&)> draw_eval;

  if (experiment == "prefgrid") {
    tc.loss = LossKind::kMse;
    auto setting = std::make_shared<PrefSetting>(
        default_pref_setting(env_rng.next_u64()));
    const int K = int(cfg.get_long("K", 3));
    const int n_inst = int(cfg.get_long("n_instances", 32));
    TaskMaskSet all = enumerate_masks(kPrefModules, K);
    all.sampler_kind = SamplerKind::kContinuous;
    auto [train_set, ood_set] =
        split_holdout(all, cfg.get_double("frac", 0.75), split_rng);
    auto tr = std::make_shared<TaskMaskSet>(train_set);
    auto ood = std::make_shared<TaskMaskSet>(ood_set);
    auto make = [setting, n_inst](const TaskMaskSet& set, int count,
                                  RngState& rng) {
      std::vector<EpisodeData> eps;
      for (int i = 0; i < count; ++i) {
        const TaskMask& mask = set.masks[rng.next_u64() % set.masks.size()];
        TaskLatent lat = sample_continuous(mask, rng);
        EpisodeData ep = pref_make_episode(*setting, lat.z, n_inst, rng);
        ep.mask = mask;
        eps.push_back(std::move(ep));
      }
      return eps;
    };
    const int B = tc.B_outer;
    source = [make, tr, B](long, RngState& rng) { return make(*tr, B, rng); };
    draw_eval = [make, ood](int count, RngState& rng) {
      return make(*ood, count, rng);
    };
  } else {  // compgrid
    tc.loss = LossKind::kXent;
    auto mazes = std::make_shared<std::vector<Maze>>(
        default_goal_mazes(env_rng.next_u64()));
    const int total = kGoalMazes * kGoalObjects * kGoalInteractions *
                      kGoalQuadrants;
    std::vector<int> goals(total);
    std::iota(goals.begin(), goals.end(), 0);
    for (int i = total - 1; i > 0; --i)
      std::swap(goals[i], goals[split_rng.next_u64() % (i + 1)]);
    const int n_train =
        std::max(1, int(std::lround(cfg.get_double("frac", 0.75) * total)));
    auto tr = std::make_shared<std::vector<int>>(goals.begin(),
                                                 goals.begin() + n_train);
    auto ood = std::make_shared<std::vector<int>>(goals.begin() + n_train,
                                                  goals.end());
    if (ood->empty()) ood->push_back(tr->back());
    auto make = [mazes](const std::vector<int>& ids, int count,
                        RngState& rng) {
      std::vector<EpisodeData> eps;
      for (int i = 0; i < count; ++i) {
        GoalSpec g = goal_from_index(ids[rng.next_u64() % ids.size()]);
        eps.push_back(goal_make_episode(*mazes, g, rng));
      }
      return eps;
    };
    const int B = tc.B_outer;
    source = [make, tr, B](long, RngState& rng) { return make(*tr, B, rng); };
    draw_eval = [make, ood](int count, RngState& rng) {
      return make(*ood, count, rng);
    };
  }

  ModelRef model{arch, dims};
  ModelInit init = init_model(arch, dims, init_rng);
  try {
    TrainResult res = train(model, init, source, tc);
    RngState draw_rng = eval_rng.split(0);
    RngState adapt_rng = eval_rng.split(1);
    auto ood_eps = draw_eval(eval_tasks, draw_rng);
    EvalResult ev =
        evaluate(model, res.shared, res.fast_init, ood_eps, tc, adapt_rng);
    out->metrics = Json{{"train_loss", res.log.records.empty()
                                           ? 0.0
                                           : res.log.records.back().loss_outer},
                        {"ood_loss", ev.loss},
                        {"ood_acc", ev.accuracy},
                        {"diverged", false}};
    emit_text(dir, "train_log.csv", res.log.to_csv(), &out->files);
    Checkpoint ckpt;
    ckpt.params = res.shared;
    ckpt.meta = Json{{"arch", to_string(arch)}, {"experiment", experiment}};
    save_checkpoint(dir + "/checkpoint.json", ckpt);
    out->files.push_back("checkpoint.json");
  } catch (const Diverged& d) {
    out->metrics = Json{{"diverged", true}, {"step", d.step}};
    out->exit_code = kExitDiverged;
    out->error = d.what();
  }
}

Json check_report(uint64_t seed) {
  RngState rng(seed);
  TheoryDims dims;
  dims.M = 4;
  dims.n = 6;
  dims.h = 5;
  dims.o = 3;
  Teacher teacher = make_teacher(dims, rng);

  std::vector<int> sigma(dims.h);
  std::iota(sigma.begin(), sigma.end(), 0);
  for (int i = dims.h - 1; i > 0; --i)
    std::swap(sigma[i], sigma[rng.next_u64() % (i + 1)]);
  std::vector<double> scales;
  for (int i = 0; i < dims.h; ++i) scales.push_back(rng.uniform(0.5, 2.0));
  Mat F = Mat::Identity(dims.M, dims.M);
  for (int i = 0; i < dims.M; ++i)
    for (int j = 0; j < dims.M; ++j)
      F(i, j) += 0.2 * rng.normal();
  Teacher student = make_transformed_student(teacher, sigma, scales, F);
  DecompositionReport rep =
      check_linear_identification(teacher, student, F, 1e-8);

  Counterexample wider = build_wider_student_counterexample();
  Counterexample disc = build_disconnected_counterexample();
  RngState probe_rng = rng.split(99);
  const bool wider_exact = counterexample_exact_on_train(wider);
  const double wider_dev = counterexample_probe_deviation(wider, probe_rng);
  const bool disc_exact = counterexample_exact_on_train(disc);
  const double disc_dev = counterexample_probe_deviation(disc, probe_rng);

  return Json{{"identification", decomposition_report_to_json(rep)},
              {"wider_exact_on_train", wider_exact},
              {"wider_probe_deviation", wider_dev},
              {"disconnected_exact_on_train", disc_exact},
              {"disconnected_probe_deviation", disc_dev},
              {"pass", rep.found && rep.max_residual < 1e-8 && wider_exact &&
                           disc_exact && wider_dev > 1e-3 && disc_dev > 1e-3}};
}

struct SweepCellRun {
  std::vector<size_t> index;
  int repeat = 0;
  std::string dir;
  RunOutcome outcome;
};

}  // namespace

bool ExperimentConfig::has(const std::string& key) const {
  return fields.contains(key);
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& dflt) const {
  if (!has(key)) return dflt;
  const Json& v = fields.at(key);
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

double ExperimentConfig::get_double(const std::string& key,
                                    double dflt) const {
  if (!has(key)) return dflt;
  const Json& v = fields.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

long ExperimentConfig::get_long(const std::string& key, long dflt) const {
  if (!has(key)) return dflt;
  const Json& v = fields.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<long>();
}

bool ExperimentConfig::get_bool(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const Json& v = fields.at(key);
  if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
  return v.get<bool>();
}

std::vector<std::string> ExperimentConfig::axis_keys() const {
  std::vector<std::string> out;
  for (auto it = fields.begin(); it != fields.end(); ++it)
    if (it.value().is_array()) out.push_back(it.key());
  return out;
}

ExperimentConfig ExperimentConfig::at_cell(
    const std::vector<std::string>& axes,
    const std::vector<size_t>& index) const {
  ExperimentConfig cfg = *this;
  for (size_t a = 0; a < axes.size(); ++a)
    cfg.fields[axes[a]] = fields.at(axes[a]).at(index[a]);
  return cfg;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig c;
  c.B_outer = int(get_long("b_outer", 8));
  c.B_inner = int(get_long("b_inner", 0));
  c.N_outer = get_long("n_outer", 1000);
  c.N_inner = int(get_long("n_inner", 10));
  c.lr_inner = get_double("lr_inner", 3e-3);
  c.lr_outer = get_double("lr_outer", 1e-3);
  c.wd_inner = get_double("wd_inner", 0.0);
  c.wd_outer = get_double("wd_outer", 0.0);
  c.grad_clip = get_double("grad_clip", 0.0);
  c.cosine = get_bool("cosine", true);
  c.loss = loss_kind_from_string(get_string("loss", "mse"));
  c.seed = uint64_t(get_long("seed", 0));
  c.log_every = int(get_long("log_every", 100));
  return c;
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be an object");
  const auto& kinds = known_keys();
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto k = kinds.find(it.key());
    if (k == kinds.end()) throw ConfigError(it.key(), "unknown key");
    const Json& v = it.value();
    if (v.is_array()) {
      if (v.empty()) throw ConfigError(it.key(), "empty sweep axis");
      for (const auto& e : v)
        if (!scalar_matches(k->second, e))
          throw ConfigError(it.key(), "axis entry has wrong type");
    } else if (!scalar_matches(k->second, v)) {
      throw ConfigError(it.key(), "wrong type");
    }
  }
  ExperimentConfig cfg;
  cfg.fields = j;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path), nullptr, true,
                    /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") +
                                e.what());
  }
  return parse_config(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(cfg.fields.dump()));
}

Json RunManifest::to_json() const {
  return Json{{"config_hash", config_hash},
              {"code_version", code_version},
              {"started", started},
              {"finished", finished},
              {"seed", seed},
              {"seed_lineage", seed_lineage},
              {"files", files}};
}

uint64_t sweep_cell_seed(uint64_t base_seed, size_t cell, int repeat) {
  RngState rng(base_seed);
  return rng.split(uint64_t(cell)).split(uint64_t(repeat)).next_u64();
}

std::string resolve_out_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MODLAB_OUT"); env && *env) return env;
  return "runs";
}

RunOutcome run_experiment(const ExperimentConfig& cfg,
                          const std::string& out_dir) {
  RunOutcome out;
  RunManifest man;
  man.config_hash = modlab::config_hash(cfg);
  man.code_version = kCodeVersion;
  man.started = iso_now();
  man.seed = uint64_t(cfg.get_long("seed", 0));
  man.seed_lineage = "root(seed).split({0:env/teacher,1:data,2:init,3:eval})";

  try {
    fs::create_directories(out_dir);
    const std::string exp = cfg.get_string("experiment", "theory");
    if (exp == "theory") {
      run_theory(cfg, out_dir, &out);
    } else if (exp == "hyperteacher") {
      run_hyper(cfg, out_dir, &out);
    } else if (exp == "prefgrid" || exp == "compgrid") {
      run_grid(cfg, exp, out_dir, &out);
    } else if (exp == "theorycheck") {
      out.metrics = check_report(man.seed);
      if (!out.metrics.at("pass").get<bool>()) out.exit_code = kExitCheckFailed;
    } else {
      throw ConfigError("experiment", "unknown experiment kind " + exp);
    }
    emit_json(out_dir, "config.json", cfg.fields, &out.files);
    emit_json(out_dir, "metrics.json", out.metrics, &out.files);
  } catch (const ConfigError& e) {
    out.exit_code = kExitBadField;
    out.error = e.what();
  } catch (const Diverged& e) {
    out.exit_code = kExitDiverged;
    out.error = e.what();
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    out.exit_code = msg.rfind("split_holdout", 0) == 0 ? kExitInfeasibleSplit
                                                       : kExitIoError;
    out.error = msg;
  }

  man.finished = iso_now();
  man.files = out.files;
  try {
    write_json_file(out_dir + "/manifest.json", man.to_json());
    out.files.push_back("manifest.json");
  } catch (const std::runtime_error& e) {
    out.exit_code = kExitIoError;
    out.error = e.what();
  }
  return out;
}

RunOutcome run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                     int jobs) {
  RunOutcome out;
  const auto axes = cfg.axis_keys();
  std::vector<size_t> sizes;
  size_t n_cells = 1;
  for (const auto& a : axes) {
    sizes.push_back(cfg.fields.at(a).size());
    n_cells *= sizes.back();
  }
  const int n_seeds = int(cfg.get_long("n_seeds", 1));
  const uint64_t base_seed = uint64_t(cfg.get_long("seed", 0));

  std::vector<SweepCellRun> runs;
  for (size_t cell = 0; cell < n_cells; ++cell) {
    std::vector<size_t> index(axes.size());
    size_t rem = cell;
    for (size_t a = axes.size(); a-- > 0;) {
      index[a] = rem % sizes[a];
      rem /= sizes[a];
    }
    for (int rep = 0; rep < n_seeds; ++rep) {
      SweepCellRun r;
      r.index = index;
      r.repeat = rep;
      r.dir = out_dir + "/cell_" + std::to_string(cell) + "_rep_" +
              std::to_string(rep);
      runs.push_back(std::move(r));
    }
  }

  auto exec = [&](SweepCellRun& r) {
    ExperimentConfig cell_cfg = cfg.at_cell(axes, r.index);
    cell_cfg.fields.erase("n_seeds");
    const size_t cell = (&r - runs.data()) / size_t(n_seeds);
    cell_cfg.fields["seed"] =
        std::int64_t(sweep_cell_seed(base_seed, cell, r.repeat));
    r.outcome = run_experiment(cell_cfg, r.dir);
  };

  fs::create_directories(out_dir);
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    for (auto& r : runs) exec(r);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next++; i < runs.size(); i = next++) exec(runs[i]);
      });
    for (auto& t : pool) t.join();
  }

  // union of numeric metric names across successful runs
  std::set<std::string> names;
  for (const auto& r : runs)
    if (r.outcome.exit_code == kExitOk)
      for (auto it = r.outcome.metrics.begin(); it != r.outcome.metrics.end();
           ++it)
        if (it.value().is_number()) names.insert(it.key());

  std::ostringstream csv;
  csv.precision(17);
  for (const auto& a : axes) csv << a << ",";
  csv << "seeds";
  for (const auto& n : names) csv << "," << n << "_mean," << n << "_sem";
  csv << "\n";
  int failures = 0;
  for (size_t cell = 0; cell < n_cells; ++cell) {
    std::vector<const SweepCellRun*> reps;
    for (int rep = 0; rep < n_seeds; ++rep) {
      const auto& r = runs[cell * n_seeds + rep];
      if (r.outcome.exit_code == kExitOk)
        reps.push_back(&r);
      else
        ++failures;
    }
    if (!reps.empty())
      for (size_t a = 0; a < axes.size(); ++a)
        csv << cfg.fields.at(axes[a]).at(reps[0]->index[a]).dump() << ",";
    else
      continue;
    csv << reps.size();
    for (const auto& n : names) {
      double sum = 0.0, sq = 0.0;
      int cnt = 0;
      for (const auto* r : reps)
        if (r->outcome.metrics.contains(n)) {
          const double v = r->outcome.metrics.at(n).get<double>();
          sum += v;
          sq += v * v;
          ++cnt;
        }
      if (cnt == 0) {
        csv << ",nan,nan";
        continue;
      }
      const double mean = sum / cnt;
      const double var = std::max(0.0, sq / cnt - mean * mean);
      const double sem =
          cnt > 1 ? std::sqrt(var * cnt / (cnt - 1)) / std::sqrt(double(cnt))
                  : 0.0;
      csv << "," << mean << "," << sem;
    }
    csv << "\n";
  }
  emit_text(out_dir, "sweep.csv", csv.str(), &out.files);
  out.metrics = Json{{"cells", n_cells},
                     {"runs", runs.size()},
                     {"failures", failures}};
  emit_json(out_dir, "sweep_summary.json", out.metrics, &out.files);
  if (failures > 0 && failures == int(runs.size()))
    out.exit_code = kExitDiverged;
  return out;
}

RunOutcome run_report(const std::string& run_root,
                      const std::string& out_dir) {
  RunOutcome out;
  struct Row {
    std::string preset, arch, experiment;
    Json metrics;
  };
  std::vector<Row> rows;
  std::error_code ec;
  for (const auto& entry : fs::recursive_directory_iterator(run_root, ec)) {
    if (!entry.is_regular_file() ||
        entry.path().filename() != "metrics.json")
      continue;
    const auto dir = entry.path().parent_path();
    if (!fs::exists(dir / "config.json")) continue;
    Row row;
    row.metrics = read_json_file((dir / "metrics.json").string());
    Json cfg = read_json_file((dir / "config.json").string());
    row.preset = cfg.value("preset", "");
    row.arch = cfg.value("arch", "");
    row.experiment = cfg.value("experiment", "");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    out.exit_code = kExitMissingRuns;
    out.error = "no completed runs under " + run_root;
    return out;
  }
  fs::create_directories(out_dir);

  auto aggregate = [](const std::vector<double>& v, double* mean,
                      double* sem) {
    double sum = 0.0, sq = 0.0;
    for (double x : v) {
      sum += x;
      sq += x * x;
    }
    *mean = sum / v.size();
    const double var = std::max(0.0, sq / v.size() - *mean * *mean);
    *sem = v.size() > 1 ? std::sqrt(var * v.size() / (v.size() - 1)) /
                              std::sqrt(double(v.size()))
                        : 0.0;
  };

  // fig2c: theory alignment by preset
  std::map<std::string, std::vector<double>> by_preset;
  for (const auto& r : rows)
    if (r.experiment == "theory" && r.metrics.contains("alignment") &&
        !r.metrics.value("diverged", false))
      by_preset[r.preset].push_back(r.metrics.at("alignment").get<double>());
  if (!by_preset.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "preset,alignment_mean,alignment_sem\n";
    for (const auto& [preset, vals] : by_preset) {
      double mean, sem;
      aggregate(vals, &mean, &sem);
      csv << preset << "," << mean << "," << sem << "\n";
    }
    emit_text(out_dir, "fig2c.csv", csv.str(), &out.files);
  }

  // fig3b: hyperteacher OOD accuracy by split and arch
  std::map<std::pair<std::string, std::string>, std::vector<double>> by_cell;
  for (const auto& r : rows)
    if (r.experiment == "hyperteacher" && r.metrics.contains("ood_acc"))
      by_cell[{r.preset, r.arch}].push_back(
          r.metrics.at("ood_acc").get<double>());
  if (!by_cell.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "split,arch,ood_acc_mean,ood_acc_sem\n";
    for (const auto& [key, vals] : by_cell) {
      double mean, sem;
      aggregate(vals, &mean, &sem);
      csv << key.first << "," << key.second << "," << mean << "," << sem
          << "\n";
    }
    emit_text(out_dir, "fig3b.csv", csv.str(), &out.files);
  }
  out.metrics = Json{{"runs", rows.size()}, {"files", out.files}};
  return out;
}

RunOutcome run_check(uint64_t seed, const std::string& out_dir) {
  RunOutcome out;
  fs::create_directories(out_dir);
  out.metrics = check_report(seed);
  emit_json(out_dir, "check.json", out.metrics, &out.files);
  if (!out.metrics.at("pass").get<bool>()) {
    out.exit_code = kExitCheckFailed;
    out.error = "theorem checks failed";
  }
  return out;
}

RunOutcome run_env_export(uint64_t seed, const std::string& out_dir) {
  RunOutcome out;
  fs::create_directories(out_dir);
  RngState root(seed);

  PrefSetting setting = default_pref_setting(root.split(0).next_u64());
  emit_json(out_dir, "pref_setting.json", pref_setting_to_json(setting),
            &out.files);
  std::vector<Maze> mazes = default_goal_mazes(root.split(1).next_u64());
  emit_json(out_dir, "goal_mazes.json", goal_mazes_to_json(mazes),
            &out.files);

  RngState ep_rng = root.split(2);
  TaskMask mask;
  mask.bits.assign(kPrefModules, 0);
  mask.bits[0] = mask.bits[1] = 1;
  TaskLatent lat = sample_continuous(mask, ep_rng);
  EpisodeData pref_ep = pref_make_episode(setting, lat.z, 8, ep_rng);
  export_episode_binary(pref_ep, out_dir + "/pref_episode.bin");
  out.files.push_back("pref_episode.bin");

  RngState goal_rng = root.split(3);
  EpisodeData goal_ep = goal_make_episode(mazes, goal_from_index(0), goal_rng);
  export_episode_binary(goal_ep, out_dir + "/goal_episode.bin");
  out.files.push_back("goal_episode.bin");

  out.metrics = Json{{"files", out.files}};
  emit_json(out_dir, "env_manifest.json", out.metrics, &out.files);
  return out;
}

}  // namespace modlab

#include <CLI11.hpp>

namespace modlab {

namespace {

int finish(const RunOutcome& out) {
  if (!out.error.empty()) std::fprintf(stderr, "error: %s\n", out.error.c_str());
  if (!out.metrics.is_null())
    std::printf("%s\n", out.metrics.dump(2).c_str());
  return out.exit_code;
}

ExperimentConfig load_or_die(const std::string& path, long seed_flag,
                             int* err) {
  try {
    ExperimentConfig cfg = load_config(path);
    if (seed_flag >= 0) cfg.fields["seed"] = seed_flag;
    return cfg;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    *err = kExitBadField;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    *err = kExitConfigParse;
  }
  return {};
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"modlab: modular meta-learning laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_flag, report_root;
  long seed_flag = -1;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "config file (JSON)")
          ->required();
    sub->add_option("--seed", seed_flag, "override the config seed");
    sub->add_option("--out", out_flag, "output directory root");
    sub->add_option("--jobs", jobs, "worker count for sweeps");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_common(run_cmd, true);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a config grid");
  add_common(sweep_cmd, true);
  CLI::App* report_cmd =
      app.add_subcommand("report", "aggregate runs into figure CSVs");
  report_cmd->add_option("--runs", report_root, "directory of completed runs")
      ->required();
  report_cmd->add_option("--out", out_flag, "output directory root");
  CLI::App* check_cmd =
      app.add_subcommand("check", "theorem and counterexample checks");
  add_common(check_cmd, false);
  CLI::App* env_cmd =
      app.add_subcommand("env-export", "export gridworld layouts and episodes");
  add_common(env_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  const std::string root = resolve_out_root(out_flag);
  if (report_cmd->parsed()) return finish(run_report(report_root, root));
  if (check_cmd->parsed())
    return finish(run_check(seed_flag >= 0 ? uint64_t(seed_flag) : 0, root));
  if (env_cmd->parsed())
    return finish(
        run_env_export(seed_flag >= 0 ? uint64_t(seed_flag) : 0, root));

  int err = kExitOk;
  ExperimentConfig cfg = load_or_die(config_path, seed_flag, &err);
  if (err != kExitOk) return err;
  if (sweep_cmd->parsed()) return finish(run_sweep(cfg, root, jobs));
  return finish(run_experiment(cfg, root));
}

}  // namespace modlab
