/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <json.hpp>
#include <string>

#include "modlab/optim.hpp"

namespace modlab {

using Json = nlohmann::json;

Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);

Json param_tree_to_json(const ParamTree& t);
ParamTree param_tree_from_json(const Json& j);

Json opt_state_to_json(const OptState& s);
OptState opt_state_from_json(const Json& j);

/// Versioned training checkpoint. meta carries free-form run information
/// (config hash, architecture name, seed).
struct Checkpoint {
  int version = 1;
  long step = 0;
  ParamTree params;
  OptState opt;
  Json meta = Json::object();
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace modlab
