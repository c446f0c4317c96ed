#pragma once

#include <cstddef>
#include <map>

#include "ddcl/matrix.hpp"
#include "ddcl/types.hpp"

namespace ddcl {

// Class id -> mean feature vector of that class.
using ClassCentres = std::map<ClassId, Vector>;

ClassCentres class_centres(const std::map<ClassId, Matrix>& features_by_class);

// Pairs each new class with up to `m_per_new` old classes, never reusing an
// old class. All (new, old) pairs are visited in ascending centre distance
// (ties: lower new id, then lower old id); a pair is accepted while the new
// class still needs partners and the old class is free. Every new class
// appears in the result, possibly with a short or empty list.
SimilarAssignment select_similar(const ClassCentres& new_centres, const ClassCentres& old_centres,
                                 std::size_t m_per_new);

}  // namespace ddcl
