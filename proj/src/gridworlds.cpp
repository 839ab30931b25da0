/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/gridworlds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace modlab {

namespace {

// up, right, down, left
constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

int step_cell(const std::vector<std::uint8_t>& walls, int size, int cell,
              int action) {
  const int r = cell / size + kDr[action];
  const int c = cell % size + kDc[action];
  if (r < 0 || r >= size || c < 0 || c >= size) return cell;
  const int next = r * size + c;
  return walls[next] ? cell : next;
}

std::vector<int> free_cells(const std::vector<std::uint8_t>& walls) {
  std::vector<int> out;
  for (int i = 0; i < int(walls.size()); ++i)
    if (!walls[i]) out.push_back(i);
  return out;
}

/// Draws k distinct entries from pool without replacement.
std::vector<int> draw_distinct(std::vector<int> pool, int k, RngState& rng) {
  if (int(pool.size()) < k)
    throw std::runtime_error("draw_distinct: pool too small");
  std::vector<int> out;
  for (int i = 0; i < k; ++i) {
    const int j = int(rng.next_u64() % pool.size());
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return out;
}

bool cells_connected(const std::vector<std::uint8_t>& walls, int size) {
  const auto free = free_cells(walls);
  if (free.empty()) return false;
  std::vector<std::uint8_t> seen(walls.size(), 0);
  std::deque<int> q{free[0]};
  seen[free[0]] = 1;
  int reached = 0;
  while (!q.empty()) {
    const int cell = q.front();
    q.pop_front();
    ++reached;
    for (int a = 0; a < 4; ++a) {
      const int nxt = step_cell(walls, size, cell, a);
      if (!seen[nxt]) {
        seen[nxt] = 1;
        q.push_back(nxt);
      }
    }
  }
  return reached == int(free.size());
}

// object index at cell among still-remaining ones, or -1
int object_at(const PrefWorld& w, int cell, int remaining) {
  for (int i = 0; i < kPrefObjects; ++i)
    if ((remaining >> i & 1) && w.obj_pos[i] == cell) return i;
  return -1;
}

struct PrefSolver {
  const PrefWorld& w;
  // (cell, remaining, steps) -> optimal value; -inf marks unvisited
  std::vector<double> memo;
  explicit PrefSolver(const PrefWorld& world)
      : w(world),
        memo(size_t(kPrefCells) * (1 << kPrefObjects) * (kPrefHorizon + 1),
             -std::numeric_limits<double>::infinity()) {}

  size_t key(int cell, int remaining, int steps) const {
    return (size_t(cell) * (1 << kPrefObjects) + remaining) *
               (kPrefHorizon + 1) +
           steps;
  }

  double q_move(int cell, int remaining, int steps, int action) {
    const int next = step_cell(w.walls, kPrefSize, cell, action);
    const int hit = object_at(w, next, remaining);
    double r = 0.0;
    int rem2 = remaining;
    if (hit >= 0) {
      r = w.pref(w.obj_color[hit]);
      rem2 &= ~(1 << hit);
    }
    return r + kPrefGamma * value(next, rem2, steps - 1);
  }

  double value(int cell, int remaining, int steps) {
    if (steps <= 0) return 0.0;
    double& slot = memo[key(cell, remaining, steps)];
    if (std::isfinite(slot)) return slot;
    double best = 0.0;  // terminate
    for (int a = 0; a < 4; ++a)
      best = std::max(best, q_move(cell, remaining, steps, a));
    slot = best;
    return best;
  }
};

double brute_force_rec(const PrefWorld& w, int cell, int remaining, int steps,
                       double discount, double acc) {
  double best = acc;  // terminate here
  if (steps <= 0) return best;
  for (int a = 0; a < 4; ++a) {
    const int next = step_cell(w.walls, kPrefSize, cell, a);
    const int hit = object_at(w, next, remaining);
    double r = 0.0;
    int rem2 = remaining;
    if (hit >= 0) {
      r = w.pref(w.obj_color[hit]);
      rem2 &= ~(1 << hit);
    }
    best = std::max(best, brute_force_rec(w, next, rem2, steps - 1,
                                          discount * kPrefGamma,
                                          acc + discount * r));
  }
  return best;
}

int quadrant_of(int cell) {
  const int r = cell / kGoalSize;
  const int c = cell % kGoalSize;
  const int half = kGoalSize / 2;  // center row/col belongs to no quadrant
  if (r == half || c == half) return -1;
  return (r > half ? 2 : 0) + (c > half ? 1 : 0);
}

Maze make_maze(RngState& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Maze m;
    m.walls.assign(kGoalCells, 0);
    for (int i = 0; i < kGoalCells; ++i)
      m.walls[i] = rng.uniform() < 0.22 ? 1 : 0;
    if (!cells_connected(m.walls, kGoalSize)) continue;
    // enough room in every quadrant for placement
    std::array<int, kGoalQuadrants> per{};
    for (int i = 0; i < kGoalCells; ++i) {
      const int q = quadrant_of(i);
      if (!m.walls[i] && q >= 0) ++per[q];
    }
    if (*std::min_element(per.begin(), per.end()) >= 3) return m;
  }
  throw std::runtime_error("make_maze: no viable layout after retries");
}

/// Shortest path from `from` to `to` as a move-action list; ties broken by
/// lowest action index at each expansion. Empty when unreachable.
std::vector<int> bfs_path(const Maze& maze, int from, int to) {
  std::vector<int> parent(kGoalCells, -1), via(kGoalCells, -1);
  std::deque<int> q{from};
  parent[from] = from;
  while (!q.empty()) {
    const int cell = q.front();
    q.pop_front();
    if (cell == to) break;
    for (int a = 0; a < 4; ++a) {
      const int nxt = step_cell(maze.walls, kGoalSize, cell, a);
      if (nxt != cell && parent[nxt] < 0) {
        parent[nxt] = cell;
        via[nxt] = a;
        q.push_back(nxt);
      }
    }
  }
  if (parent[to] < 0) return {};
  std::vector<int> actions;
  for (int cell = to; cell != from; cell = parent[cell])
    actions.push_back(via[cell]);
  std::reverse(actions.begin(), actions.end());
  return actions;
}

std::vector<std::uint8_t> walls_from_json(const Json& j) {
  std::vector<std::uint8_t> walls;
  for (const auto& v : j) walls.push_back(std::uint8_t(int(v)));
  return walls;
}

Json walls_to_json(const std::vector<std::uint8_t>& walls) {
  Json j = Json::array();
  for (auto w : walls) j.push_back(int(w));
  return j;
}

}  // namespace

PrefSetting default_pref_setting(uint64_t seed) {
  PrefSetting s;
  // four interior pillars; free space stays connected
  const char* rows[kPrefSize] = {".....", ".#.#.", ".....", ".#.#.", "....."};
  s.walls.assign(kPrefCells, 0);
  for (int r = 0; r < kPrefSize; ++r)
    for (int c = 0; c < kPrefSize; ++c)
      s.walls[r * kPrefSize + c] = rows[r][c] == '#' ? 1 : 0;
  RngState rng(seed);
  s.templates = trunc_normal_init(kPrefModules, kPrefColors,
                                  1.0 / std::sqrt(double(kPrefModules)), rng);
  return s;
}

PrefWorld pref_make_instance(const PrefSetting& setting, const Vec& z,
                             RngState& rng) {
  if (z.size() != kPrefModules)
    throw std::invalid_argument("pref_make_instance: bad latent size");
  PrefWorld w;
  w.walls = setting.walls;
  w.pref = setting.templates.transpose() * z;
  auto cells = draw_distinct(free_cells(w.walls), kPrefObjects + 1, rng);
  auto colors = draw_distinct([] {
    std::vector<int> v(kPrefColors);
    std::iota(v.begin(), v.end(), 0);
    return v;
  }(), kPrefObjects, rng);
  for (int i = 0; i < kPrefObjects; ++i) {
    w.obj_pos[i] = cells[i];
    w.obj_color[i] = colors[i];
  }
  w.agent = cells[kPrefObjects];
  return w;
}

Vec pref_q(const PrefWorld& world, int agent, int remaining, int steps) {
  PrefSolver solver(world);
  Vec q(kPrefActions);
  for (int a = 0; a < 4; ++a) q(a) = solver.q_move(agent, remaining, steps, a);
  q(4) = 0.0;
  return q;
}

double pref_optimal_return(const PrefWorld& world) {
  PrefSolver solver(world);
  return solver.value(world.agent, (1 << kPrefObjects) - 1, kPrefHorizon);
}

double pref_brute_force_return(const PrefWorld& world, int agent,
                               int remaining, int steps) {
  return brute_force_rec(world, agent, remaining, steps, 1.0, 0.0);
}

Vec pref_observation(const PrefWorld& world, int agent, int remaining) {
  Vec obs = Vec::Zero(kPrefObsDim);
  for (int i = 0; i < kPrefCells; ++i)
    if (world.walls[i]) obs(i) = 1.0;
  for (int i = 0; i < kPrefObjects; ++i)
    if (remaining >> i & 1)
      obs(kPrefCells * (1 + world.obj_color[i]) + world.obj_pos[i]) = 1.0;
  obs(kPrefCells * (1 + kPrefColors) + agent) = 1.0;
  return obs;
}

EpisodeData pref_make_episode(const PrefSetting& setting, const Vec& z,
                              int n_instances, RngState& rng) {
  if (n_instances < 2 || n_instances % 2 != 0)
    throw std::invalid_argument("pref_make_episode: n_instances must be even");
  std::vector<Vec> xs, ys;
  int support_rows = 0;
  for (int inst = 0; inst < n_instances; ++inst) {
    PrefWorld w = pref_make_instance(setting, z, rng);
    PrefSolver solver(w);
    int agent = w.agent;
    int remaining = (1 << kPrefObjects) - 1;
    for (int steps = kPrefHorizon; steps > 0; --steps) {
      Vec q(kPrefActions);
      for (int a = 0; a < 4; ++a)
        q(a) = solver.q_move(agent, remaining, steps, a);
      q(4) = 0.0;
      xs.push_back(pref_observation(w, agent, remaining));
      ys.push_back(q);
      // forced stop once nothing left is worth collecting
      bool any_positive = false;
      for (int i = 0; i < kPrefObjects; ++i)
        if ((remaining >> i & 1) && w.pref(w.obj_color[i]) > 0.0)
          any_positive = true;
      int action = 4;
      if (any_positive) {
        action = 0;
        for (int a = 1; a < kPrefActions; ++a)
          if (q(a) > q(action)) action = a;
      }
      if (action == 4) break;
      agent = step_cell(w.walls, kPrefSize, agent, action);
      const int hit = object_at(w, agent, remaining);
      if (hit >= 0) remaining &= ~(1 << hit);
    }
    if (inst == n_instances / 2 - 1) support_rows = int(xs.size());
  }
  EpisodeData ep;
  ep.latent = z;
  const int total = int(xs.size());
  ep.support_x.resize(support_rows, kPrefObsDim);
  ep.support_y.resize(support_rows, kPrefActions);
  ep.query_x.resize(total - support_rows, kPrefObsDim);
  ep.query_y.resize(total - support_rows, kPrefActions);
  for (int i = 0; i < total; ++i) {
    if (i < support_rows) {
      ep.support_x.row(i) = xs[i].transpose();
      ep.support_y.row(i) = ys[i].transpose();
    } else {
      ep.query_x.row(i - support_rows) = xs[i].transpose();
      ep.query_y.row(i - support_rows) = ys[i].transpose();
    }
  }
  return ep;
}

int goal_index(const GoalSpec& g) {
  return ((g.maze_id * kGoalObjects + g.object) * kGoalInteractions +
          g.interaction) *
             kGoalQuadrants +
         g.quadrant;
}

GoalSpec goal_from_index(int idx) {
  GoalSpec g;
  g.quadrant = idx % kGoalQuadrants;
  idx /= kGoalQuadrants;
  g.interaction = idx % kGoalInteractions;
  idx /= kGoalInteractions;
  g.object = idx % kGoalObjects;
  g.maze_id = idx / kGoalObjects;
  return g;
}

std::vector<Maze> default_goal_mazes(uint64_t seed) {
  RngState root(seed);
  std::vector<Maze> mazes;
  for (int i = 0; i < kGoalMazes; ++i) {
    RngState rng = root.split(i);
    mazes.push_back(make_maze(rng));
  }
  return mazes;
}

int goal_bfs_distance(const Maze& maze, int from, int to) {
  if (from == to) return 0;
  const auto path = bfs_path(maze, from, to);
  return path.empty() ? -1 : int(path.size());
}

GoalInstance goal_make_instance(const std::vector<Maze>& mazes,
                                const GoalSpec& goal, RngState& rng) {
  if (goal.maze_id < 0 || goal.maze_id >= int(mazes.size()))
    throw std::invalid_argument("goal_make_instance: bad maze id");
  const Maze& maze = mazes[goal.maze_id];
  const auto free = free_cells(maze.walls);
  std::vector<int> in_quadrant;
  for (int cell : free)
    if (quadrant_of(cell) == goal.quadrant) in_quadrant.push_back(cell);
  if (in_quadrant.empty())
    throw std::runtime_error("goal_make_instance: empty quadrant");

  for (int attempt = 0; attempt < 100; ++attempt) {
    GoalInstance inst;
    inst.goal = goal;
    const int target =
        in_quadrant[int(rng.next_u64() % in_quadrant.size())];
    std::vector<int> pool = free;
    pool.erase(std::find(pool.begin(), pool.end(), target));
    auto rest = draw_distinct(pool, kGoalObjects, rng);  // others + agent
    int j = 0;
    for (int t = 0; t < kGoalObjects; ++t)
      inst.obj_pos[t] = (t == goal.object) ? target : rest[j++];
    inst.agent = rest[kGoalObjects - 1];

    auto moves = bfs_path(maze, inst.agent, target);
    if (moves.empty()) continue;  // unreachable under this placement
    int cell = inst.agent;
    for (int a : moves) {
      inst.path_states.push_back(cell);
      inst.path_actions.push_back(a);
      cell = step_cell(maze.walls, kGoalSize, cell, a);
    }
    inst.path_states.push_back(cell);
    inst.path_actions.push_back(4 + goal.interaction);
    return inst;
  }
  throw std::runtime_error("goal_make_instance: no reachable placement");
}

Vec goal_observation(const Maze& maze, const GoalInstance& inst, int agent) {
  Vec obs = Vec::Zero(kGoalObsDim);
  for (int i = 0; i < kGoalCells; ++i)
    if (maze.walls[i]) obs(i) = 1.0;
  for (int t = 0; t < kGoalObjects; ++t)
    obs(kGoalCells * (1 + t) + inst.obj_pos[t]) = 1.0;
  obs(kGoalCells * (1 + kGoalObjects) + agent) = 1.0;
  return obs;
}

EpisodeData goal_make_episode(const std::vector<Maze>& mazes,
                              const GoalSpec& goal, RngState& rng) {
  const Maze& maze = mazes[goal.maze_id];
  auto fill = [&](const GoalInstance& inst, Mat& x, Mat& y) {
    const int rows = int(inst.path_actions.size());
    x.resize(rows, kGoalObsDim);
    y.resize(rows, 1);
    for (int i = 0; i < rows; ++i) {
      x.row(i) = goal_observation(maze, inst, inst.path_states[i]).transpose();
      y(i, 0) = double(inst.path_actions[i]);
    }
  };
  EpisodeData ep;
  GoalInstance support = goal_make_instance(mazes, goal, rng);
  GoalInstance query = goal_make_instance(mazes, goal, rng);
  fill(support, ep.support_x, ep.support_y);
  fill(query, ep.query_x, ep.query_y);
  return ep;
}

GoalMetrics goal_metrics(const std::vector<std::vector<int>>& predicted,
                         const std::vector<std::vector<int>>& optimal) {
  if (predicted.size() != optimal.size())
    throw std::invalid_argument("goal_metrics: episode count mismatch");
  GoalMetrics m;
  long correct = 0, total = 0, full = 0;
  for (size_t e = 0; e < predicted.size(); ++e) {
    if (predicted[e].size() != optimal[e].size())
      throw std::invalid_argument("goal_metrics: length mismatch");
    bool all = true;
    for (size_t i = 0; i < predicted[e].size(); ++i) {
      ++total;
      if (predicted[e][i] == optimal[e][i])
        ++correct;
      else
        all = false;
    }
    if (all) ++full;
  }
  if (total > 0) m.action_accuracy = double(correct) / double(total);
  if (!predicted.empty()) m.path_success = double(full) / double(predicted.size());
  return m;
}

Json pref_setting_to_json(const PrefSetting& s) {
  return Json{{"size", kPrefSize},
              {"walls", walls_to_json(s.walls)},
              {"templates", mat_to_json(s.templates)}};
}

PrefSetting pref_setting_from_json(const Json& j) {
  if (int(j.at("size")) != kPrefSize)
    throw std::runtime_error("pref_setting_from_json: wrong grid size");
  PrefSetting s;
  s.walls = walls_from_json(j.at("walls"));
  s.templates = mat_from_json(j.at("templates"));
  return s;
}

Json goal_mazes_to_json(const std::vector<Maze>& mazes) {
  Json arr = Json::array();
  for (const auto& m : mazes) arr.push_back(walls_to_json(m.walls));
  return Json{{"size", kGoalSize}, {"mazes", arr}};
}

std::vector<Maze> goal_mazes_from_json(const Json& j) {
  if (int(j.at("size")) != kGoalSize)
    throw std::runtime_error("goal_mazes_from_json: wrong grid size");
  std::vector<Maze> mazes;
  for (const auto& w : j.at("mazes")) mazes.push_back(Maze{walls_from_json(w)});
  return mazes;
}

void export_episode_binary(const EpisodeData& ep, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("export_episode_binary: cannot open " + path);
  auto write_mat = [&](const Mat& m) {
    const std::int64_t header[3] = {m.rows(), m.cols(), 0};
    std::fwrite(header, sizeof(std::int64_t), 2, f);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        std::fwrite(&v, sizeof(double), 1, f);
      }
  };
  write_mat(ep.support_x);
  write_mat(ep.support_y);
  write_mat(ep.query_x);
  write_mat(ep.query_y);
  std::fclose(f);
}

}  // namespace modlab
