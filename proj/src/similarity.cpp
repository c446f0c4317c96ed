#include "ddcl/similarity.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <tuple>

#include "ddcl/error.hpp"

namespace ddcl {

ClassCentres class_centres(const std::map<ClassId, Matrix>& features_by_class) {
  ClassCentres centres;
  for (const auto& [id, feats] : features_by_class) {
    if (feats.rows() == 0) throw InputError("class " + std::to_string(id) + " has no samples");
    centres.emplace(id, column_mean(feats));
  }
  return centres;
}

SimilarAssignment select_similar(const ClassCentres& new_centres, const ClassCentres& old_centres,
                                 std::size_t m_per_new) {
  SimilarAssignment result;
  for (const auto& [id, centre] : new_centres) result[id];
  if (m_per_new == 0 || old_centres.empty()) return result;

  struct Pair {
    double dist;
    ClassId new_id;
    ClassId old_id;
  };
  std::vector<Pair> pairs;
  pairs.reserve(new_centres.size() * old_centres.size());
  for (const auto& [nid, nc] : new_centres) {
    for (const auto& [oid, oc] : old_centres) pairs.push_back({squared_distance(nc, oc), nid, oid});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.new_id, a.old_id) < std::tie(b.dist, b.new_id, b.old_id);
  });

  std::set<ClassId> assigned;
  std::size_t satisfied = 0;
  for (const Pair& p : pairs) {
    auto& list = result[p.new_id];
    if (list.size() >= m_per_new || assigned.contains(p.old_id)) continue;
    list.push_back(p.old_id);
    assigned.insert(p.old_id);
    if (list.size() == m_per_new) ++satisfied;
    if (satisfied == new_centres.size() || assigned.size() == old_centres.size()) break;
  }
  return result;
}

}  // namespace ddcl
