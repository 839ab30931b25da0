/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/value_grad.hpp"

#include <map>
#include <stdexcept>

namespace modlab {

namespace {

std::map<std::string, ValueGradFn>& registry() {
  static std::map<std::string, ValueGradFn> r;
  return r;
}

}  // namespace

void register_function(const std::string& id, ValueGradFn fn) {
  registry()[id] = std::move(fn);
}

bool has_function(const std::string& id) {
  return registry().count(id) != 0;
}

std::vector<std::string> registered_functions() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::pair<double, ParamTree> value_and_grad(const std::string& id,
                                            const ParamTree& params,
                                            const Batch& batch) {
  auto it = registry().find(id);
  if (it == registry().end())
    throw std::out_of_range("value_and_grad: unregistered function " + id);
  return it->second(params, batch);
}

}  // namespace modlab
