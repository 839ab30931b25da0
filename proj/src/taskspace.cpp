/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/taskspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace modlab {

int TaskMask::popcount() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), 1));
}

bool TaskMask::overlaps(const TaskMask& other) const {
  if (bits.size() != other.bits.size())
    throw std::invalid_argument("TaskMask::overlaps: length mismatch");
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i] && other.bits[i]) return true;
  return false;
}

std::string TaskMask::str() const {
  std::string s(bits.size(), '0');
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

TaskMask TaskMask::from_string(const std::string& s) {
  TaskMask m;
  m.bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("TaskMask::from_string: expected 0/1, got " +
                                  std::string(1, c));
    m.bits.push_back(c == '1' ? 1 : 0);
  }
  return m;
}

bool TaskMaskSet::contains(const TaskMask& m) const {
  return std::find(masks.begin(), masks.end(), m) != masks.end();
}

int TaskMaskSet::max_popcount() const {
  int k = 0;
  for (const auto& m : masks) k = std::max(k, m.popcount());
  return k;
}

bool is_compositional(const TaskMaskSet& set) {
  if (set.masks.empty())
    throw std::invalid_argument("is_compositional: empty set");
  std::vector<int> cover(set.M, 0);
  for (const auto& m : set.masks)
    for (int i = 0; i < set.M; ++i) cover[i] += m.bits[i];
  return std::all_of(cover.begin(), cover.end(), [](int c) { return c > 0; });
}

namespace {

int uf_find(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

bool is_connected(const TaskMaskSet& set) {
  const int n = static_cast<int>(set.masks.size());
  if (n == 0) throw std::invalid_argument("is_connected: empty set");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (set.masks[a].overlaps(set.masks[b]))
        parent[uf_find(parent, a)] = uf_find(parent, b);
  int root = uf_find(parent, 0);
  for (int i = 1; i < n; ++i)
    if (uf_find(parent, i) != root) return false;
  return true;
}

TaskLatent sample_continuous(const TaskMask& mask, RngState& rng) {
  if (!mask.any())
    throw std::invalid_argument("sample_continuous: zero mask");
  const int m = mask.size();
  Vec z(m);
  for (int i = 0; i < m; ++i) z[i] = rng.exponential();
  for (int i = 0; i < m; ++i)
    if (!mask.bits[i]) z[i] = 0.0;
  z /= 1.0 + z.lpNorm<1>();
  for (int i = 0; i < m; ++i)
    if (mask.bits[i]) z[i] = 0.5 * (z[i] + 1.0);
  return TaskLatent{std::move(z), mask};
}

TaskLatent sample_discrete(const TaskMask& mask) {
  if (!mask.any()) throw std::invalid_argument("sample_discrete: zero mask");
  const double s = 1.0 / std::sqrt(static_cast<double>(mask.popcount()));
  Vec z = Vec::Zero(mask.size());
  for (int i = 0; i < mask.size(); ++i)
    if (mask.bits[i]) z[i] = s;
  return TaskLatent{std::move(z), mask};
}

TaskMaskSet enumerate_masks(int M, int K) {
  if (K < 1 || K > M || M > 30)
    throw std::invalid_argument("enumerate_masks: need 1 <= K <= M <= 30");
  TaskMaskSet out;
  out.M = M;
  for (unsigned long v = 1; v < (1ul << M); ++v) {
    TaskMask m;
    m.bits.resize(M);
    // leftmost character is the most significant bit, so increasing v walks
    // the bit strings in lexicographic order
    for (int i = 0; i < M; ++i) m.bits[i] = (v >> (M - 1 - i)) & 1u;
    if (m.popcount() <= K) out.masks.push_back(std::move(m));
  }
  return out;
}

namespace {

void sort_masks(TaskMaskSet& s) {
  std::sort(s.masks.begin(), s.masks.end());
  s.masks.erase(std::unique(s.masks.begin(), s.masks.end()), s.masks.end());
}

// Swap ood masks into train until every module is covered. Greedy per
// uncovered module; keeps the partition sizes fixed.
bool repair_split(TaskMaskSet& train, TaskMaskSet& ood) {
  for (int mod = 0; mod < train.M; ++mod) {
    int cover = 0;
    for (const auto& m : train.masks) cover += m.bits[mod];
    if (cover > 0) continue;
    bool fixed = false;
    for (size_t oi = 0; oi < ood.masks.size() && !fixed; ++oi) {
      if (!ood.masks[oi].bits[mod]) continue;
      for (size_t ti = 0; ti < train.masks.size() && !fixed; ++ti) {
        // removal must not uncover any other module
        bool safe = true;
        for (int j = 0; j < train.M && safe; ++j) {
          if (!train.masks[ti].bits[j] || ood.masks[oi].bits[j]) continue;
          int c = 0;
          for (const auto& m : train.masks) c += m.bits[j];
          if (c - 1 == 0) safe = false;
        }
        if (!safe) continue;
        std::swap(train.masks[ti], ood.masks[oi]);
        fixed = true;
      }
    }
    if (!fixed) return false;
  }
  return true;
}

}  // namespace

HoldoutSplit split_holdout(const TaskMaskSet& set, double fraction,
                           RngState& rng) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("split_holdout: fraction must be in (0,1)");
  if (!is_compositional(set))
    throw std::runtime_error(
        "split_holdout: full set is not compositional, no split can be");
  const int n = static_cast<int>(set.masks.size());
  const int n_train =
      static_cast<int>(std::lround(fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n)
    throw std::runtime_error("split_holdout: degenerate partition size");

  std::vector<int> idx(n);
  HoldoutSplit split;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(i + 1));
      std::swap(idx[i], idx[j]);
    }
    split.train = TaskMaskSet{set.M, {}, set.sampler_kind};
    split.ood = TaskMaskSet{set.M, {}, set.sampler_kind};
    for (int i = 0; i < n; ++i)
      (i < n_train ? split.train : split.ood)
          .masks.push_back(set.masks[idx[i]]);
    if (is_compositional(split.train)) {
      sort_masks(split.train);
      sort_masks(split.ood);
      return split;
    }
  }
  if (!repair_split(split.train, split.ood))
    throw std::runtime_error("split_holdout: no compositional split found");
  sort_masks(split.train);
  sort_masks(split.ood);
  return split;
}

namespace {

TaskMaskSet from_strings(int M, SamplerKind kind,
                         const std::vector<std::string>& strs) {
  TaskMaskSet s;
  s.M = M;
  s.sampler_kind = kind;
  for (const auto& str : strs) s.masks.push_back(TaskMask::from_string(str));
  return s;
}

TaskMask unit(int M, int i) {
  TaskMask m;
  m.bits.assign(M, 0);
  m.bits[i % M] = 1;
  return m;
}

TaskMask pair_mask(int M, int i, int j) {
  TaskMask m;
  m.bits.assign(M, 0);
  m.bits[i % M] = 1;
  m.bits[j % M] = 1;
  return m;
}

std::vector<std::string> singletons6() {
  return {"100000", "010000", "001000", "000100", "000010", "000001"};
}

// Pair masks used by neither variant become the shared OOD evaluation set.
TaskMaskSet pairs_not_in(int M, const std::vector<const TaskMaskSet*>& used,
                         SamplerKind kind) {
  TaskMaskSet ood;
  ood.M = M;
  ood.sampler_kind = kind;
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      TaskMask p = pair_mask(M, i, j);
      bool taken = false;
      for (const auto* s : used) taken = taken || s->contains(p);
      if (!taken) ood.masks.push_back(std::move(p));
    }
  return ood;
}

TaskMaskSet ring_masks(int M) {
  TaskMaskSet s;
  s.M = M;
  for (int i = 0; i < M; ++i) s.masks.push_back(unit(M, i));
  for (int i = 0; i < M; ++i) s.masks.push_back(pair_mask(M, i, i + 1));
  for (int i = 0; i < M; ++i) s.masks.push_back(pair_mask(M, i, i + 2));
  sort_masks(s);
  return s;
}

TaskMaskSet clustered_masks(int M) {
  if (M % 2 != 0)
    throw std::invalid_argument("clustered-disconnected needs even M");
  TaskMaskSet s;
  s.M = M;
  for (int i = 0; i < M; ++i) s.masks.push_back(unit(M, i));
  const int half = M / 2;
  for (int lo : {0, half})
    for (int i = lo; i < lo + half; ++i)
      for (int j = i + 1; j < lo + half; ++j)
        s.masks.push_back(pair_mask(M, i, j));
  sort_masks(s);
  return s;
}

struct ParsedName {
  std::string base;
  std::vector<double> args;
};

ParsedName parse_name(const std::string& name) {
  ParsedName p;
  auto lp = name.find('(');
  if (lp == std::string::npos) {
    p.base = name;
    return p;
  }
  if (name.back() != ')')
    throw std::out_of_range("preset: malformed name " + name);
  p.base = name.substr(0, lp);
  std::string inner = name.substr(lp + 1, name.size() - lp - 2);
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ','))
    p.args.push_back(std::stod(tok));
  return p;
}

}  // namespace

Preset preset(const std::string& name, RngState& rng) {
  ParsedName p = parse_name(name);
  const SamplerKind cont = SamplerKind::kContinuous;
  const SamplerKind disc = SamplerKind::kDiscrete;

  auto theory = [&](SamplerKind kind,
                    std::vector<std::string> strs) -> Preset {
    Preset out;
    out.train = from_strings(6, kind, strs);
    out.ood = pairs_not_in(6, {&out.train}, kind);
    return out;
  };

  if (p.base == "theory-discrete-connected") {
    auto strs = singletons6();
    for (auto s : {"110000", "011000", "001100", "000110", "000011", "100001"})
      strs.push_back(s);
    return theory(disc, strs);
  }
  if (p.base == "theory-discrete-disconnected") {
    auto strs = singletons6();
    for (auto s : {"110000", "011000", "101000", "000110", "000011", "000101"})
      strs.push_back(s);
    return theory(disc, strs);
  }
  if (p.base == "theory-continuous-connected-1")
    return theory(cont,
                  {"110000", "011000", "001100", "000110", "000011", "100001"});
  if (p.base == "theory-continuous-connected-2")
    return theory(cont, {"111000", "001110", "100011"});
  if (p.base == "theory-continuous-disconnected-1")
    return theory(cont,
                  {"110000", "011000", "101000", "000110", "000011", "000101"});
  if (p.base == "theory-continuous-disconnected-2")
    return theory(cont, singletons6());
  if (p.base == "theory-continuous-disconnected-3")
    return theory(cont, {"111000", "000111", "110000", "011000", "101000",
                         "000110", "000011", "000101"});

  if (p.base == "ring-connected" || p.base == "clustered-disconnected") {
    if (p.args.size() != 1)
      throw std::out_of_range("preset: " + p.base + " expects (M)");
    int M = static_cast<int>(p.args[0]);
    Preset out;
    TaskMaskSet ring = ring_masks(M);
    TaskMaskSet clus = clustered_masks(M);
    out.train = (p.base == "ring-connected") ? ring : clus;
    out.ood = pairs_not_in(M, {&ring, &clus}, cont);
    return out;
  }
  if (p.base == "compositional") {
    if (p.args.size() != 3)
      throw std::out_of_range("preset: compositional expects (M,K,frac)");
    TaskMaskSet all = enumerate_masks(static_cast<int>(p.args[0]),
                                      static_cast<int>(p.args[1]));
    HoldoutSplit s = split_holdout(all, p.args[2], rng);
    return Preset{std::move(s.train), std::move(s.ood)};
  }
  if (p.base == "noncompositional") {
    if (p.args.size() != 2)
      throw std::out_of_range("preset: noncompositional expects (M,K)");
    int M = static_cast<int>(p.args[0]);
    TaskMaskSet all = enumerate_masks(M, static_cast<int>(p.args[1]));
    Preset out;
    out.train = TaskMaskSet{M, {}, cont};
    out.ood = TaskMaskSet{M, {}, cont};
    // the last module never appears in training
    for (const auto& m : all.masks)
      (m.bits[M - 1] ? out.ood : out.train).masks.push_back(m);
    return out;
  }
  throw std::out_of_range("preset: unknown name " + name);
}

std::vector<std::string> preset_names() {
  return {"theory-discrete-connected",
          "theory-discrete-disconnected",
          "theory-continuous-connected-1",
          "theory-continuous-connected-2",
          "theory-continuous-disconnected-1",
          "theory-continuous-disconnected-2",
          "theory-continuous-disconnected-3",
          "ring-connected(M)",
          "clustered-disconnected(M)",
          "compositional(M,K,frac)",
          "noncompositional(M,K)"};
}

unsigned long long count_tasks(int M, int K, int L) {
  if (K < 1 || K > M || L < 2)
    throw std::invalid_argument("count_tasks: need 1 <= K <= M and L >= 2");
  unsigned long long total = 0;
  for (int k = 1; k <= K; ++k) {
    unsigned long long c = 1;
    for (int i = 0; i < k; ++i)
      c = c * static_cast<unsigned long long>(M - i) /
          static_cast<unsigned long long>(i + 1);
    unsigned long long term = 1;
    for (int l = 0; l < L - 1; ++l) term *= c;
    total += term;
  }
  return total;
}

std::string mask_set_to_text(const TaskMaskSet& set) {
  std::ostringstream ss;
  ss << "M=" << set.M << " kind="
     << (set.sampler_kind == SamplerKind::kContinuous ? "continuous"
                                                      : "discrete")
     << "\n";
  for (const auto& m : set.masks) ss << m.str() << "\n";
  return ss.str();
}

TaskMaskSet mask_set_from_text(const std::string& text) {
  std::istringstream ss(text);
  std::string header;
  if (!std::getline(ss, header))
    throw std::invalid_argument("mask_set_from_text: empty input");
  TaskMaskSet set;
  std::string kind;
  {
    std::istringstream hs(header);
    std::string mtok, ktok;
    hs >> mtok >> ktok;
    if (mtok.rfind("M=", 0) != 0 || ktok.rfind("kind=", 0) != 0)
      throw std::invalid_argument("mask_set_from_text: bad header: " + header);
    set.M = std::stoi(mtok.substr(2));
    kind = ktok.substr(5);
  }
  if (kind == "continuous")
    set.sampler_kind = SamplerKind::kContinuous;
  else if (kind == "discrete")
    set.sampler_kind = SamplerKind::kDiscrete;
  else
    throw std::invalid_argument("mask_set_from_text: bad kind: " + kind);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    TaskMask m = TaskMask::from_string(line);
    if (m.size() != set.M)
      throw std::invalid_argument("mask_set_from_text: mask length != M");
    set.masks.push_back(std::move(m));
  }
  return set;
}

}  // namespace modlab
