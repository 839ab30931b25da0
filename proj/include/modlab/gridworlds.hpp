/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#pragma once

#include <array>

#include "modlab/serialize.hpp"
#include "modlab/trainer.hpp"

namespace modlab {

// ---------------------------------------------------------------------------
// Compositional preferences: 5x5 grid, 4 objects, 8 colors, 5 actions
// (up, right, down, left, terminate), discount 0.9, horizon 8.
// ---------------------------------------------------------------------------

constexpr int kPrefSize = 5;
constexpr int kPrefCells = kPrefSize * kPrefSize;
constexpr int kPrefObjects = 4;
constexpr int kPrefColors = 8;
constexpr int kPrefModules = 8;
constexpr int kPrefActions = 5;
constexpr int kPrefHorizon = 8;
constexpr double kPrefGamma = 0.9;
// observation planes: walls + one per color + agent
constexpr int kPrefObsDim = kPrefCells * (1 + kPrefColors + 1);

/// Fixed wall layout plus the preference templates (rows are modules).
struct PrefSetting {
  std::vector<std::uint8_t> walls;  // kPrefCells, 1 = wall
  Mat templates;                    // kPrefModules x kPrefColors
};

/// Deterministic default setting: hand-fixed symmetric wall layout,
/// truncated-normal templates drawn from the seed.
PrefSetting default_pref_setting(uint64_t seed);

struct PrefWorld {
  std::vector<std::uint8_t> walls;
  std::array<int, kPrefObjects> obj_pos;
  std::array<int, kPrefObjects> obj_color;
  int agent = 0;
  Vec pref;  // length kPrefColors
};

/// Uniform object/agent placement on distinct wall-free cells. Throws
/// std::runtime_error when the layout has too few free cells.
PrefWorld pref_make_instance(const PrefSetting& setting, const Vec& z,
                             RngState& rng);

/// Exact finite-horizon action values at a world state. remaining is a
/// bitmask over the 4 objects; steps is the horizon left. First action's
/// reward is undiscounted.
Vec pref_q(const PrefWorld& world, int agent, int remaining, int steps);

/// Optimal return from the initial state (max over pref_q at full horizon).
double pref_optimal_return(const PrefWorld& world);

/// Brute-force maximum discounted return over all action sequences of
/// length <= steps. Oracle for pref_q; exponential, small inputs only.
double pref_brute_force_return(const PrefWorld& world, int agent,
                               int remaining, int steps);

/// Greedy rollouts over n_instances placements; x rows are flattened
/// observations, y rows the 5 action values. First half of the instances
/// forms the support set. Terminate is forced when no remaining object has
/// positive preference.
EpisodeData pref_make_episode(const PrefSetting& setting, const Vec& z,
                              int n_instances, RngState& rng);

Vec pref_observation(const PrefWorld& world, int agent, int remaining);

// ---------------------------------------------------------------------------
// Compositional goals: 11x11 mazes, 5 object types, 2 interactions,
// 4 quadrants; 6 actions (4 moves + 2 interactions).
// ---------------------------------------------------------------------------

constexpr int kGoalSize = 11;
constexpr int kGoalCells = kGoalSize * kGoalSize;
constexpr int kGoalMazes = 5;
constexpr int kGoalObjects = 5;
constexpr int kGoalInteractions = 2;
constexpr int kGoalQuadrants = 4;
constexpr int kGoalActions = 4 + kGoalInteractions;
constexpr int kGoalObsDim = kGoalCells * (1 + kGoalObjects + 1);

struct GoalSpec {
  int maze_id = 0;      // [0, 5)
  int object = 0;       // target object type, [0, 5)
  int interaction = 0;  // [0, 2)
  int quadrant = 0;     // [0, 4)
};

/// Flat index over the 200-goal space and its inverse.
int goal_index(const GoalSpec& g);
GoalSpec goal_from_index(int idx);

struct Maze {
  std::vector<std::uint8_t> walls;  // kGoalCells
};

/// Five deterministic connected mazes generated from the seed, each with
/// free cells in every quadrant.
std::vector<Maze> default_goal_mazes(uint64_t seed);

struct GoalInstance {
  GoalSpec goal;
  std::array<int, kGoalObjects> obj_pos;  // object type t at obj_pos[t]
  int agent = 0;
  std::vector<int> path_states;   // agent cells along the optimal path
  std::vector<int> path_actions;  // optimal action per state (last is the
                                  // interaction)
};

/// Places objects (target inside the goal quadrant) and the agent, and
/// computes the BFS-optimal demonstration. Bounded resampling when the
/// target is unreachable.
GoalInstance goal_make_instance(const std::vector<Maze>& mazes,
                                const GoalSpec& goal, RngState& rng);

/// BFS distance from the agent to the target object in the instance's maze.
int goal_bfs_distance(const Maze& maze, int from, int to);

Vec goal_observation(const Maze& maze, const GoalInstance& inst, int agent);

/// Support = one demonstration, query = a demonstration under a fresh
/// placement; y is the optimal-action index column.
EpisodeData goal_make_episode(const std::vector<Maze>& mazes,
                              const GoalSpec& goal, RngState& rng);

struct GoalMetrics {
  double action_accuracy = 0.0;
  double path_success = 0.0;
};

/// Per-state argmax match rate plus the fraction of episodes matched on
/// every step.
GoalMetrics goal_metrics(const std::vector<std::vector<int>>& predicted,
                         const std::vector<std::vector<int>>& optimal);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json pref_setting_to_json(const PrefSetting& s);
PrefSetting pref_setting_from_json(const Json& j);
Json goal_mazes_to_json(const std::vector<Maze>& mazes);
std::vector<Maze> goal_mazes_from_json(const Json& j);

/// Flat binary export: int64 header (rows, x_cols, y_cols), then row-major
/// doubles for x and y of support followed by query.
void export_episode_binary(const EpisodeData& ep, const std::string& path);

}  // namespace modlab
