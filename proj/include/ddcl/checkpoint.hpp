#pragma once

#include <filesystem>
#include <iosfwd>

#include "ddcl/mlp.hpp"

namespace ddcl {

// Model checkpoint, all integers and floats little-endian:
//   bytes 0..7   magic "DDCLMLP1"
//   u64          number of layer dims D
//   u64 x D      layer dims (input, hidden..., outputs)
//   per layer i: f64 x dims[i]*dims[i+1] weights, row-major
//                f64 x dims[i+1]           bias
void write_checkpoint(std::ostream& out, const MlpClassifier& model);
MlpClassifier read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const MlpClassifier& model);
MlpClassifier load_checkpoint(const std::filesystem::path& path);

}  // namespace ddcl
