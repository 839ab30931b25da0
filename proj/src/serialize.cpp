/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace modlab {

Json mat_to_json(const Mat& m) {
  Json data = Json::array();
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Mat mat_from_json(const Json& j) {
  long rows = j.at("rows").get<long>();
  long cols = j.at("cols").get<long>();
  const Json& data = j.at("data");
  if (static_cast<long>(data.size()) != rows * cols)
    throw std::invalid_argument("mat_from_json: data length mismatch");
  Mat m(rows, cols);
  long idx = 0;
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < cols; ++c, ++idx) m(i, c) = data[idx].get<double>();
  return m;
}

Json param_tree_to_json(const ParamTree& t) {
  Json j = Json::object();
  for (const auto& [k, v] : t.leaves) j[k] = mat_to_json(v);
  return j;
}

ParamTree param_tree_from_json(const Json& j) {
  ParamTree t;
  for (auto it = j.begin(); it != j.end(); ++it)
    t.leaves.emplace(it.key(), mat_from_json(it.value()));
  return t;
}

Json opt_state_to_json(const OptState& s) {
  return Json{{"m", param_tree_to_json(s.m)},
              {"v", param_tree_to_json(s.v)},
              {"step", s.step},
              {"hyper",
               Json{{"lr", s.hyper.lr},
                    {"beta1", s.hyper.beta1},
                    {"beta2", s.hyper.beta2},
                    {"eps", s.hyper.eps},
                    {"weight_decay", s.hyper.weight_decay}}}};
}

OptState opt_state_from_json(const Json& j) {
  OptState s;
  s.m = param_tree_from_json(j.at("m"));
  s.v = param_tree_from_json(j.at("v"));
  s.step = j.at("step").get<long>();
  const Json& h = j.at("hyper");
  s.hyper.lr = h.at("lr").get<double>();
  s.hyper.beta1 = h.at("beta1").get<double>();
  s.hyper.beta2 = h.at("beta2").get<double>();
  s.hyper.eps = h.at("eps").get<double>();
  s.hyper.weight_decay = h.at("weight_decay").get<double>();
  return s;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Json j{{"version", ckpt.version},
         {"step", ckpt.step},
         {"params", param_tree_to_json(ckpt.params)},
         {"opt", opt_state_to_json(ckpt.opt)},
         {"meta", ckpt.meta}};
  write_json_file(path, j);
}

Checkpoint load_checkpoint(const std::string& path) {
  Json j = read_json_file(path);
  int version = j.at("version").get<int>();
  if (version != 1)
    throw std::runtime_error("load_checkpoint: unsupported version " +
                             std::to_string(version));
  Checkpoint c;
  c.version = version;
  c.step = j.at("step").get<long>();
  c.params = param_tree_from_json(j.at("params"));
  c.opt = opt_state_from_json(j.at("opt"));
  c.meta = j.at("meta");
  return c;
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Json read_json_file(const std::string& path) {
  return Json::parse(read_text_file(path));
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace modlab
