/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include "modlab/models.hpp"
#include "modlab/serialize.hpp"
#include "modlab/taskspace.hpp"

namespace modlab {

/// True iff no two rows of W are colinear (|cos| < 1 - tol) and no row is
/// zero.
bool rows_noncolinear(const Mat& W, double tol = 1e-9);

struct DecompositionReport {
  bool found = false;
  std::vector<int> sigma;  // teacher neuron matched to student neuron i
  std::vector<int> eps;    // sign per student neuron
  Mat F;
  double max_residual = 0.0;
  bool exhaustive = false;   // exhaustive permutation search ran
  bool greedy_only = false;  // h too large for the exhaustive fallback
};

/// Searches for (sigma, eps) such that a_sigma(i) Theta_sigma(i) matches
/// eps_i a_hat_i Theta_hat_i F with relative residual <= tol. Greedy cosine
/// matching first, exhaustive search over permutations as fallback (h <= 8).
DecompositionReport check_linear_identification(const Teacher& teacher,
                                                const Teacher& student,
                                                const Mat& F, double tol);

/// Teacher copy transformed by a neuron permutation, positive per-neuron
/// scales, and an invertible latent map (student latent z_hat = F z). The
/// result matches the teacher exactly on every task.
Teacher make_transformed_student(const Teacher& teacher,
                                 const std::vector<int>& sigma,
                                 const std::vector<double>& scales,
                                 const Mat& F);

struct Counterexample {
  Teacher teacher;
  Teacher student;
  TaskMaskSet train;
  TaskMask probe;
};

/// Teacher h=1 over modules (A,B,C); student h_hat=3 with rows (A,B,0),
/// (0,B,C), (0,B,0) and readouts (lambda, lambda, -lambda); training
/// families {110, 011}, probe 111.
Counterexample build_wider_student_counterexample();

/// Teacher h=2 with neuron slices (A|B), (C|D) and equal readouts; student
/// swaps to (A|D), (C|B); training masks {10, 01}, probe 11.
Counterexample build_disconnected_counterexample();

/// Exact rational-arithmetic check that the student equals the teacher on
/// every training family, over a deterministic grid of rational latents and
/// inputs. Requires integer-valued parameters.
bool counterexample_exact_on_train(const Counterexample& ce);

/// Mean squared teacher-student deviation on the probe composition,
/// Monte Carlo over continuous latents and uniform inputs.
double counterexample_probe_deviation(const Counterexample& ce, RngState& rng,
                                      int n_tasks = 100, int n_inputs = 100);

struct SupportReport {
  bool compositional = false;
  bool connected = false;
};

SupportReport check_support_conditions(const TaskMaskSet& set);

Json decomposition_report_to_json(const DecompositionReport& r);

}  // namespace modlab
