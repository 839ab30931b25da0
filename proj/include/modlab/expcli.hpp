/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/serialize.hpp"
#include "modlab/trainer.hpp"

namespace modlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfigParse = 2,
  kExitBadField = 3,
  kExitDiverged = 4,
  kExitInfeasibleSplit = 5,
  kExitIoError = 6,
  kExitMissingRuns = 7,
  kExitCheckFailed = 8,
};

/// Config problem tied to a specific field.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : std::runtime_error("config field '" + f + "': " + msg),
        field(std::move(f)) {}
};

/// One flat key/value config. Values are scalars; a list marks a sweep axis.
/// Unknown keys are rejected at parse time.
struct ExperimentConfig {
  Json fields = Json::object();

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  long get_long(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;

  std::vector<std::string> axis_keys() const;  // list-valued fields
  /// Config with the axis fields fixed to one grid point.
  ExperimentConfig at_cell(const std::vector<std::string>& axes,
                           const std::vector<size_t>& index) const;

  TrainConfig train_config() const;
};

ExperimentConfig parse_config(const Json& j);
/// Parses the file (comments allowed) and validates keys.
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the canonical (sorted-key, whitespace-free) serialization,
/// as a 16-digit hex string.
std::string config_hash(const ExperimentConfig& cfg);

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  std::string started;
  std::string finished;
  uint64_t seed = 0;
  std::string seed_lineage;
  std::vector<std::string> files;
  Json to_json() const;
};

extern const char* kCodeVersion;

struct RunOutcome {
  int exit_code = kExitOk;
  Json metrics = Json::object();
  std::vector<std::string> files;
  std::string error;
};

/// Executes one experiment and writes metrics.json, train_log.csv,
/// checkpoint.json, and manifest.json into out_dir.
RunOutcome run_experiment(const ExperimentConfig& cfg,
                          const std::string& out_dir);

/// Cartesian product over the list-valued fields, n_seeds runs per cell with
/// seeds derived from (base seed, cell index, repeat). Per-cell failures are
/// recorded and the sweep continues. Writes sweep.csv plus per-run dirs.
RunOutcome run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                     int jobs);

/// Aggregates completed run dirs under run_root into per-figure CSV series.
RunOutcome run_report(const std::string& run_root,
                      const std::string& out_dir);

/// Theorem checks: transform converse plus both counterexamples.
RunOutcome run_check(uint64_t seed, const std::string& out_dir);

/// Gridworld layout/template JSON files and sample episode binaries.
RunOutcome run_env_export(uint64_t seed, const std::string& out_dir);

/// Per-cell seed derivation used by sweeps; exposed for tests.
uint64_t sweep_cell_seed(uint64_t base_seed, size_t cell, int repeat);

/// Output root: --out flag if set, else $MODLAB_OUT, else "runs".
std::string resolve_out_root(const std::string& flag_value);

int cli_main(int argc, char** argv);

}  // namespace modlab
