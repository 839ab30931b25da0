/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <cmath>
#include <cstdint>

namespace modlab {

/// Counter-based splittable RNG with value semantics. Identical seed and
/// call order reproduce identical draws; split() children are independent
/// streams that never overlap with the parent.
class RngState {
 public:
  explicit RngState(uint64_t seed = 0, uint64_t stream = 0)
      : state_(mix(seed + kGolden * (stream + 1))) {}

  /// Independent child stream. Does not advance this state.
  RngState split(uint64_t child) const {
    RngState r;
    r.state_ = mix(state_ ^ mix(kGolden * (child + 1)));
    return r;
  }

  uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller, one draw per call).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Unit-rate exponential.
  double exponential() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u);
  }

  /// Normal(0, std) truncated at +-2 std, by rejection.
  double trunc_normal(double std_dev) {
    double x = normal();
    while (x < -2.0 || x > 2.0) x = normal();
    return x * std_dev;
  }

 private:
  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;

  // splitmix64 finalizer
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_ = 0;
};

}  // namespace modlab
