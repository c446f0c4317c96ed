#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace ddcl {

using ClassId = std::int32_t;

// New class id -> old class ids chosen as its confusable partners.
using SimilarAssignment = std::map<ClassId, std::vector<ClassId>>;

// Class id -> meta-class id.
using MetaClassMap = std::map<ClassId, ClassId>;

}  // namespace ddcl
