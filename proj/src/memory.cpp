#include "ddcl/memory.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"

namespace ddcl {

std::vector<std::size_t> herding_select(const Matrix& features, std::size_t m) {
  const std::size_t n = features.rows();
  if (n == 0) throw InputError("herding_select: empty feature set");
  if (m == 0) throw InputError("herding_select: m must be positive");
  const std::size_t h = features.cols();
  const Vector mu = column_mean(features);
  const std::size_t picks = std::min(m, n);

  std::vector<std::size_t> order;
  order.reserve(picks);
  std::vector<bool> taken(n, false);
  Vector running(h, 0.0);
  Vector candidate(h);
  for (std::size_t k = 1; k <= picks; ++k) {
    std::size_t best = n;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      auto row = features.row(i);
      for (std::size_t c = 0; c < h; ++c) candidate[c] = (running[c] + row[c]) / static_cast<double>(k);
      const double dist = squared_distance(mu, candidate);
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    taken[best] = true;
    order.push_back(best);
    auto row = features.row(best);
    for (std::size_t c = 0; c < h; ++c) running[c] += row[c];
  }
  return order;
}

std::vector<std::size_t> random_select(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0) throw InputError("random_select: empty sample set");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(std::min(m, n));
  return order;
}

std::size_t ExemplarMemory::quota() const noexcept {
  return sized_for_ == 0 ? budget_ : budget_ / sized_for_;
}

std::size_t ExemplarMemory::total_stored() const noexcept {
  std::size_t total = 0;
  for (const auto& [id, list] : per_class_) total += list.size();
  return total;
}

const std::vector<std::size_t>& ExemplarMemory::exemplars(ClassId id) const {
  auto it = per_class_.find(id);
  if (it == per_class_.end()) throw StateError("class " + std::to_string(id) + " has no exemplars");
  return it->second;
}

void ExemplarMemory::rebalance(std::size_t total_classes) {
  if (total_classes == 0) throw InputError("rebalance: total_classes must be positive");
  sized_for_ = total_classes;
  const std::size_t q = quota();
  for (auto& [id, list] : per_class_) {
    if (list.size() > q) list.resize(q);
  }
}

void ExemplarMemory::admit_class(ClassId id, const Matrix& features, std::span<const std::size_t> samples,
                                 ExemplarPolicy policy, std::uint64_t seed) {
  if (contains(id)) throw StateError("class " + std::to_string(id) + " already stored");
  if (features.rows() != samples.size()) throw ShapeError("admit_class: one feature row per sample required");
  if (samples.empty()) throw InputError("admit_class: class has no samples");
  rebalance(std::max(sized_for_, per_class_.size() + 1));
  const std::size_t q = quota();
  std::vector<std::size_t> stored;
  if (q > 0) {
    const auto local = policy == ExemplarPolicy::herding ? herding_select(features, q)
                                                         : random_select(samples.size(), q, seed);
    stored.reserve(local.size());
    for (std::size_t r : local) stored.push_back(samples[r]);
  }
  per_class_.emplace(id, std::move(stored));
}

void ExemplarMemory::restore(std::size_t sized_for, std::map<ClassId, std::vector<std::size_t>> per_class) {
  std::size_t total = 0;
  for (const auto& [id, list] : per_class) {
    std::set<std::size_t> unique(list.begin(), list.end());
    if (unique.size() != list.size()) throw InputError("class " + std::to_string(id) + " lists an exemplar twice");
    total += list.size();
  }
  if (total > budget_) throw InputError("restored memory exceeds its budget");
  sized_for_ = sized_for;
  per_class_ = std::move(per_class);
}

}  // namespace ddcl
