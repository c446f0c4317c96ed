#pragma once

// Independent reference implementations used only by the tests. None of these
// call into the code paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "ddcl/matrix.hpp"
#include "ddcl/mlp.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/types.hpp"

namespace ddcl::oracle {

// Per-sample evaluation with explicit index loops.
inline std::vector<double> logits_of(const MlpClassifier& model, const std::vector<double>& x, bool stop_before_head = false) {
  std::vector<double> a = x;
  const std::size_t layers = model.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    if (stop_before_head && l + 1 == layers) break;
    const Matrix& w = model.weights(l);
    std::vector<double> z(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = model.bias(l)[j];
      for (std::size_t i = 0; i < w.rows(); ++i) s += a[i] * w(i, j);
      z[j] = (l + 1 < layers) ? std::max(0.0, s) : s;
    }
    a = std::move(z);
  }
  return a;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

// Every scalar parameter of a model, addressed uniformly.
inline std::vector<double*> parameters(MlpClassifier& model) {
  std::vector<double*> out;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    for (double& v : model.weights(l).values()) out.push_back(&v);
    for (double& v : model.bias(l)) out.push_back(&v);
  }
  return out;
}

inline std::vector<double> flatten(const Gradients& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    for (double v : g.weights[l].values()) out.push_back(v);
    for (double v : g.biases[l]) out.push_back(v);
  }
  return out;
}

// Central differences of `loss(model)` w.r.t. every parameter.
inline std::vector<double> finite_difference(MlpClassifier model, const std::function<double(const MlpClassifier&)>& loss,
                                             double step = 1e-5) {
  std::vector<double> grad;
  auto params = parameters(model);
  for (double* p : params) {
    const double saved = *p;
    *p = saved + step;
    const double up = loss(model);
    *p = saved - step;
    const double down = loss(model);
    *p = saved;
    grad.push_back((up - down) / (2.0 * step));
  }
  return grad;
}

// Relative error with an absolute floor so exact zeros compare sanely.
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Central differences of f w.r.t. every entry of x.
inline Matrix finite_difference(const Matrix& x, const std::function<double(const Matrix&)>& f, double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = probe.values()[k];
    probe.values()[k] = saved + step;
    const double up = f(probe);
    probe.values()[k] = saved - step;
    const double down = f(probe);
    probe.values()[k] = saved;
    g.values()[k] = (up - down) / (2.0 * step);
  }
  return g;
}

// Softmax by the textbook formula, no max subtraction (fine for small logits).
inline std::vector<double> plain_softmax(const std::vector<double>& z, double t) {
  double sum = 0.0;
  for (double v : z) sum += std::exp(v / t);
  std::vector<double> p;
  for (double v : z) p.push_back(std::exp(v / t) / sum);
  return p;
}

// -(1/N) sum_i sum_j p_ij log q_ij literally.
inline double distill_double_sum(const Matrix& student, const Matrix& teacher, const std::vector<std::size_t>& map,
                                 double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < student.rows(); ++i) {
    std::vector<double> zt(teacher.row(i).begin(), teacher.row(i).end());
    std::vector<double> zs;
    for (std::size_t pos : map) zs.push_back(student(i, pos));
    const auto p = plain_softmax(zt, t);
    const auto q = plain_softmax(zs, t);
    for (std::size_t j = 0; j < p.size(); ++j) total += p[j] * std::log(q[j]);
  }
  return -total / static_cast<double>(student.rows());
}

// Herding by recomputing the candidate exemplar mean from scratch for every
// candidate at every step.
inline std::vector<std::size_t> herding(const Matrix& f, std::size_t m) {
  const std::size_t n = f.rows();
  std::vector<double> mu(f.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < f.cols(); ++c) mu[c] += f(i, c);
  }
  for (double& v : mu) v /= static_cast<double>(n);
  std::vector<std::size_t> picked;
  while (picked.size() < std::min(m, n)) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (std::find(picked.begin(), picked.end(), cand) != picked.end()) continue;
      std::vector<std::size_t> set = picked;
      set.push_back(cand);
      double d = 0.0;
      for (std::size_t c = 0; c < f.cols(); ++c) {
        double s = 0.0;
        for (std::size_t i : set) s += f(i, c);
        const double diff = mu[c] - s / static_cast<double>(set.size());
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    picked.push_back(best);
  }
  return picked;
}

// Greedy assignment simulated one acceptance at a time: at every step scan all
// still-eligible pairs and accept the closest (ties: lower new id, lower old id).
inline SimilarAssignment select_similar(const std::map<ClassId, std::vector<double>>& fresh,
                                        const std::map<ClassId, std::vector<double>>& old, std::size_t m) {
  SimilarAssignment out;
  for (const auto& [id, c] : fresh) out[id];
  std::set<ClassId> used;
  while (true) {
    bool found = false;
    double best_d = 0.0;
    ClassId bn = 0;
    ClassId bo = 0;
    for (const auto& [nid, nc] : fresh) {
      if (out[nid].size() >= m) continue;
      for (const auto& [oid, oc] : old) {
        if (used.contains(oid)) continue;
        double d = 0.0;
        for (std::size_t k = 0; k < nc.size(); ++k) d += (nc[k] - oc[k]) * (nc[k] - oc[k]);
        d = std::sqrt(d);
        if (!found || d < best_d) {
          found = true;
          best_d = d;
          bn = nid;
          bo = oid;
        }
      }
    }
    if (!found) break;
    out[bn].push_back(bo);
    used.insert(bo);
  }
  return out;
}

}  // namespace ddcl::oracle
