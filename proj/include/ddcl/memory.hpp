#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ddcl/matrix.hpp"
#include "ddcl/types.hpp"

namespace ddcl {

enum class ExemplarPolicy { herding, random };

// Greedy herding: with mu the mean feature row, the k-th pick is the unpicked
// row x minimizing ||mu - (x + sum of previous picks) / k||. Ties go to the
// lowest row index. Returns min(m, n) row indices in pick order.
std::vector<std::size_t> herding_select(const Matrix& features, std::size_t m);

// Seeded random subset of 0..n-1 of size min(m, n), for ablations.
std::vector<std::size_t> random_select(std::size_t n, std::size_t m, std::uint64_t seed);

// Exemplar store with a fixed total budget. Each class keeps its exemplars in
// selection order, so shrinking a quota keeps a prefix.
class ExemplarMemory {
 public:
  explicit ExemplarMemory(std::size_t budget) : budget_(budget) {}

  std::size_t budget() const noexcept { return budget_; }
  // Per-class share for the number of classes the memory is currently sized for.
  std::size_t quota() const noexcept;
  std::size_t total_stored() const noexcept;
  std::size_t class_count() const noexcept { return per_class_.size(); }
  bool contains(ClassId id) const { return per_class_.contains(id); }

  const std::map<ClassId, std::vector<std::size_t>>& classes() const noexcept { return per_class_; }
  const std::vector<std::size_t>& exemplars(ClassId id) const;

  // Resizes the memory for `total_classes` classes: every list is cut to its
  // first floor(budget / total_classes) entries.
  void rebalance(std::size_t total_classes);

  // Selects exemplars for a class not yet stored. Row r of `features`
  // describes sample `samples[r]`; stored values are entries of `samples`.
  // Existing classes are rebalanced first so the budget is never exceeded.
  void admit_class(ClassId id, const Matrix& features, std::span<const std::size_t> samples,
                   ExemplarPolicy policy = ExemplarPolicy::herding, std::uint64_t seed = 0);

  // Restores a stored list verbatim (checkpoint loading).
  void restore(std::size_t sized_for, std::map<ClassId, std::vector<std::size_t>> per_class);
  std::size_t sized_for() const noexcept { return sized_for_; }

  bool operator==(const ExemplarMemory&) const = default;

 private:
  std::size_t budget_;
  std::size_t sized_for_ = 0;
  std::map<ClassId, std::vector<std::size_t>> per_class_;
};

}  // namespace ddcl
