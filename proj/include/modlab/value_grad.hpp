/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <functional>

#include "modlab/param_tree.hpp"

namespace modlab {

/// One batch of supervised data. x rows are inputs, y rows are regression
/// targets, logits, or a single index column depending on the loss.
struct Batch {
  Mat x;
  Mat y;
};

/// Loss value plus exact gradient for every leaf of params.
using ValueGradFn =
    std::function<std::pair<double, ParamTree>(const ParamTree&, const Batch&)>;

/// Global registry keyed by "<architecture>/<loss>" style ids. Registration
/// happens at model construction; lookups are read-only afterwards.
void register_function(const std::string& id, ValueGradFn fn);
bool has_function(const std::string& id);
std::vector<std::string> registered_functions();

std::pair<double, ParamTree> value_and_grad(const std::string& id,
                                            const ParamTree& params,
                                            const Batch& batch);

}  // namespace modlab
