/*
 * Copyright (c) 2026 The modlab authors
 * Licensed under the Apache License, Version 2.0.
 */
#include "modlab/theorylab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modlab {

bool rows_noncolinear(const Mat& W, double tol) {
  for (long i = 0; i < W.rows(); ++i)
    if (W.row(i).norm() == 0.0) return false;
  for (long i = 0; i < W.rows(); ++i)
    for (long j = i + 1; j < W.rows(); ++j) {
      double c = W.row(i).dot(W.row(j)) / (W.row(i).norm() * W.row(j).norm());
      if (std::abs(c) >= 1.0 - tol) return false;
    }
  return true;
}

namespace {

// Rank-1 witness a_i (x) Theta_i; equality of these products is what
// linear identification asserts, and it absorbs per-neuron scale.
Mat neuron_product(const Mat& a, const Mat& theta_slice, int i) {
  Mat vec_slice(1, theta_slice.size());
  long idx = 0;
  for (long r = 0; r < theta_slice.rows(); ++r)
    for (long c = 0; c < theta_slice.cols(); ++c)
      vec_slice(0, idx++) = theta_slice(r, c);
  return a.row(i).transpose() * vec_slice;
}

double pair_residual(const Mat& teacher_prod, const Mat& student_prod,
                     int* eps) {
  double dot = (teacher_prod.array() * student_prod.array()).sum();
  int e = dot >= 0.0 ? 1 : -1;
  if (eps) *eps = e;
  double denom = teacher_prod.norm();
  if (denom == 0.0) denom = 1.0;
  return (teacher_prod - double(e) * student_prod).norm() / denom;
}

}  // namespace

DecompositionReport check_linear_identification(const Teacher& teacher,
                                                const Teacher& student,
                                                const Mat& F, double tol) {
  if (teacher.h != student.h)
    throw std::invalid_argument("check_linear_identification: h mismatch");
  const int h = teacher.h;
  DecompositionReport rep;
  rep.F = F;

  std::vector<Mat> tp(h), sp(h);
  for (int i = 0; i < h; ++i) {
    tp[i] = neuron_product(teacher.a, teacher.neuron_slice(i), i);
    Mat mapped = student.neuron_slice(i) * F;
    sp[i] = neuron_product(student.a, mapped, i);
  }

  auto eval_perm = [&](const std::vector<int>& sigma, std::vector<int>* eps,
                       double* max_res) {
    double worst = 0.0;
    std::vector<int> e(h);
    for (int i = 0; i < h; ++i)
      worst = std::max(worst, pair_residual(tp[sigma[i]], sp[i], &e[i]));
    if (eps) *eps = e;
    *max_res = worst;
  };

  // greedy by |cosine| between the rank-1 witnesses
  std::vector<int> sigma(h, -1);
  {
    std::vector<bool> used_t(h, false), used_s(h, false);
    for (int pick = 0; pick < h; ++pick) {
      double best = -1.0;
      int bi = -1, bj = -1;
      for (int t = 0; t < h; ++t) {
        if (used_t[t]) continue;
        for (int s = 0; s < h; ++s) {
          if (used_s[s]) continue;
          double nt = tp[t].norm();
          double ns = sp[s].norm();
          double c = (nt == 0.0 || ns == 0.0)
                         ? 0.0
                         : std::abs((tp[t].array() * sp[s].array()).sum()) /
                               (nt * ns);
          if (c > best) {
            best = c;
            bi = t;
            bj = s;
          }
        }
      }
      used_t[bi] = true;
      used_s[bj] = true;
      sigma[bj] = bi;
    }
  }
  double res = 0.0;
  std::vector<int> eps;
  eval_perm(sigma, &eps, &res);
  if (res <= tol) {
    rep.found = true;
    rep.sigma = sigma;
    rep.eps = eps;
    rep.max_residual = res;
    return rep;
  }

  if (h > 8) {
    rep.greedy_only = true;
    rep.sigma = sigma;
    rep.eps = eps;
    rep.max_residual = res;
    return rep;
  }
  rep.exhaustive = true;
  std::vector<int> perm(h);
  std::iota(perm.begin(), perm.end(), 0);
  double best_res = res;
  std::vector<int> best_sigma = sigma, best_eps = eps;
  do {
    double r = 0.0;
    std::vector<int> e;
    eval_perm(perm, &e, &r);
    if (r < best_res) {
      best_res = r;
      best_sigma = perm;
      best_eps = e;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  rep.sigma = best_sigma;
  rep.eps = best_eps;
  rep.max_residual = best_res;
  rep.found = best_res <= tol;
  return rep;
}

Teacher make_transformed_student(const Teacher& teacher,
                                 const std::vector<int>& sigma,
                                 const std::vector<double>& scales,
                                 const Mat& F) {
  if (static_cast<int>(sigma.size()) != teacher.h ||
      static_cast<int>(scales.size()) != teacher.h)
    throw std::invalid_argument("make_transformed_student: size mismatch");
  for (double c : scales)
    if (c <= 0.0)
      throw std::invalid_argument(
          "make_transformed_student: scales must be positive (ReLU "
          "homogeneity)");
  Mat Finv = F.inverse();
  Teacher s;
  s.M = teacher.M;
  s.n = teacher.n;
  s.h = teacher.h;
  s.o = teacher.o;
  s.theta.resize(teacher.theta.rows(), teacher.M);
  s.a.resize(teacher.h, teacher.o);
  for (int i = 0; i < teacher.h; ++i) {
    Mat slice = scales[i] * teacher.neuron_slice(sigma[i]) * Finv;
    s.theta.block(long(i) * teacher.n, 0, teacher.n, teacher.M) = slice;
    s.a.row(i) = teacher.a.row(sigma[i]) / scales[i];
  }
  return s;
}

namespace {

// Small exact rational; operands stay tiny so long long never overflows.
struct Rat {
  long long n = 0, d = 1;
  Rat() = default;
  Rat(long long num, long long den = 1) : n(num), d(den) { norm(); }
  void norm() {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    long long g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n == 0) d = 1;
  }
  Rat operator+(const Rat& o) const { return Rat(n * o.d + o.n * d, d * o.d); }
  Rat operator-(const Rat& o) const { return Rat(n * o.d - o.n * d, d * o.d); }
  Rat operator*(const Rat& o) const { return Rat(n * o.n, d * o.d); }
  bool operator==(const Rat& o) const { return n == o.n && d == o.d; }
  bool neg() const { return n < 0; }
};

Rat relu(const Rat& r) { return r.neg() ? Rat(0) : r; }

// Forward pass over rationals, without the 1/sqrt(n) scaling (a positive
// constant factor common to teacher and student, irrelevant for equality).
std::vector<Rat> rational_forward(const Teacher& t, const std::vector<Rat>& z,
                                  const std::vector<Rat>& x) {
  std::vector<Rat> out(t.o, Rat(0));
  for (int i = 0; i < t.h; ++i) {
    Rat pre(0);
    for (int j = 0; j < t.n; ++j) {
      Rat w(0);
      for (int m = 0; m < t.M; ++m) {
        double entry = t.theta(long(i) * t.n + j, m);
        w = w + Rat(static_cast<long long>(entry)) * z[m];
      }
      pre = pre + w * x[j];
    }
    Rat act = relu(pre);
    for (int k = 0; k < t.o; ++k) {
      double a = t.a(i, k);
      out[k] = out[k] + Rat(static_cast<long long>(a)) * act;
    }
  }
  return out;
}

bool all_integer(const Mat& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      if (m(i, j) != std::floor(m(i, j))) return false;
  return true;
}

}  // namespace

Counterexample build_wider_student_counterexample() {
  // modules A = e1, B = e2, C = e3 in R^4, lambda = 1
  const int n = 4, M = 3;
  Counterexample ce;
  ce.teacher.M = M;
  ce.teacher.n = n;
  ce.teacher.h = 1;
  ce.teacher.o = 1;
  ce.teacher.theta = Mat::Zero(n, M);
  ce.teacher.theta(0, 0) = 1.0;  // A
  ce.teacher.theta(1, 1) = 1.0;  // B
  ce.teacher.theta(2, 2) = 1.0;  // C
  ce.teacher.a = Mat::Ones(1, 1);

  ce.student.M = M;
  ce.student.n = n;
  ce.student.h = 3;
  ce.student.o = 1;
  ce.student.theta = Mat::Zero(3 * n, M);
  // row 1: (A, B, 0)
  ce.student.theta(0, 0) = 1.0;
  ce.student.theta(1, 1) = 1.0;
  // row 2: (0, B, C)
  ce.student.theta(n + 1, 1) = 1.0;
  ce.student.theta(n + 2, 2) = 1.0;
  // row 3: (0, B, 0)
  ce.student.theta(2 * n + 1, 1) = 1.0;
  ce.student.a.resize(3, 1);
  ce.student.a << 1.0, 1.0, -1.0;

  ce.train.M = M;
  ce.train.sampler_kind = SamplerKind::kContinuous;
  ce.train.masks = {TaskMask::from_string("110"), TaskMask::from_string("011")};
  ce.probe = TaskMask::from_string("111");
  return ce;
}

Counterexample build_disconnected_counterexample() {
  // A = e1, B = e2, C = e3, D = e4 in R^4, lambda = 1
  const int n = 4, M = 2;
  Counterexample ce;
  ce.teacher.M = M;
  ce.teacher.n = n;
  ce.teacher.h = 2;
  ce.teacher.o = 1;
  ce.teacher.theta = Mat::Zero(2 * n, M);
  // neuron 1: (A | B), neuron 2: (C | D)
  ce.teacher.theta(0, 0) = 1.0;
  ce.teacher.theta(1, 1) = 1.0;
  ce.teacher.theta(n + 2, 0) = 1.0;
  ce.teacher.theta(n + 3, 1) = 1.0;
  ce.teacher.a = Mat::Ones(2, 1);

  ce.student = ce.teacher;
  ce.student.theta = Mat::Zero(2 * n, M);
  // neuron 1: (A | D), neuron 2: (C | B)
  ce.student.theta(0, 0) = 1.0;
  ce.student.theta(3, 1) = 1.0;
  ce.student.theta(n + 2, 0) = 1.0;
  ce.student.theta(n + 1, 1) = 1.0;

  ce.train.M = M;
  ce.train.sampler_kind = SamplerKind::kContinuous;
  ce.train.masks = {TaskMask::from_string("10"), TaskMask::from_string("01")};
  ce.probe = TaskMask::from_string("11");
  return ce;
}

bool counterexample_exact_on_train(const Counterexample& ce) {
  if (!all_integer(ce.teacher.theta) || !all_integer(ce.student.theta) ||
      !all_integer(ce.teacher.a) || !all_integer(ce.student.a))
    throw std::invalid_argument(
        "counterexample_exact_on_train: parameters must be integer-valued");
  const std::vector<Rat> z_values = {Rat(1, 2), Rat(2, 3), Rat(3, 4),
                                     Rat(5, 7)};
  const std::vector<Rat> x_values = {Rat(-2), Rat(-1, 3), Rat(1, 2), Rat(2)};
  const int n = ce.teacher.n;

  for (const auto& mask : ce.train.masks) {
    std::vector<int> on;
    for (int m = 0; m < mask.size(); ++m)
      if (mask.bits[m]) on.push_back(m);
    // all assignments of z_values to on-mask coordinates
    std::vector<size_t> zi(on.size(), 0);
    while (true) {
      std::vector<Rat> z(mask.size(), Rat(0));
      for (size_t k = 0; k < on.size(); ++k) z[on[k]] = z_values[zi[k]];
      // all assignments of x_values to coordinates
      std::vector<size_t> xi(n, 0);
      while (true) {
        std::vector<Rat> x(n);
        for (int j = 0; j < n; ++j) x[j] = x_values[xi[j]];
        auto yt = rational_forward(ce.teacher, z, x);
        auto ys = rational_forward(ce.student, z, x);
        for (size_t k = 0; k < yt.size(); ++k)
          if (!(yt[k] == ys[k])) return false;
        int pos = 0;
        while (pos < n && ++xi[pos] == x_values.size()) xi[pos++] = 0;
        if (pos == n) break;
      }
      size_t pos = 0;
      while (pos < on.size() && ++zi[pos] == z_values.size()) zi[pos++] = 0;
      if (pos == on.size()) break;
    }
  }
  return true;
}

double counterexample_probe_deviation(const Counterexample& ce, RngState& rng,
                                      int n_tasks, int n_inputs) {
  double total = 0.0;
  long count = 0;
  const double b = std::sqrt(3.0);
  for (int t = 0; t < n_tasks; ++t) {
    TaskLatent lat = sample_continuous(ce.probe, rng);
    Mat X(n_inputs, ce.teacher.n);
    for (int i = 0; i < n_inputs; ++i)
      for (int j = 0; j < ce.teacher.n; ++j) X(i, j) = rng.uniform(-b, b);
    Mat yt = teacher_forward(ce.teacher, lat.z, X);
    Mat ys = teacher_forward(ce.student, lat.z, X);
    total += (yt - ys).squaredNorm();
    count += yt.size();
  }
  return total / static_cast<double>(count);
}

SupportReport check_support_conditions(const TaskMaskSet& set) {
  SupportReport r;
  r.compositional = is_compositional(set);
  r.connected = is_connected(set);
  return r;
}

Json decomposition_report_to_json(const DecompositionReport& r) {
  return Json{{"found", r.found},
              {"sigma", r.sigma},
              {"eps", r.eps},
              {"max_residual", r.max_residual},
              {"exhaustive", r.exhaustive},
              {"greedy_only", r.greedy_only},
              {"F", mat_to_json(r.F)}};
}

}  // namespace modlab
