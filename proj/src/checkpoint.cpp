#include "ddcl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ddcl/error.hpp"

namespace ddcl {

namespace {

constexpr std::array<char, 8> kMagic{'D', 'D', 'C', 'L', 'M', 'L', 'P', '1'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (std::size_t k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw SchemaError("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_checkpoint(std::ostream& out, const MlpClassifier& model) {
  out.write(kMagic.data(), kMagic.size());
  const auto& dims = model.layer_dims();
  put_u64(out, dims.size());
  for (std::size_t d : dims) put_u64(out, d);
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    for (double v : model.weights(i).values()) put_f64(out, v);
    for (double v : model.bias(i)) put_f64(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

MlpClassifier read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw SchemaError("not a model checkpoint");
  const std::uint64_t count = get_u64(in);
  if (count < 2 || count > 64) throw SchemaError("checkpoint has implausible layer count");
  std::vector<std::size_t> dims;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint64_t d = get_u64(in);
    if (d == 0 || d > kMaxDim) throw SchemaError("checkpoint has implausible layer width");
    dims.push_back(static_cast<std::size_t>(d));
  }
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Matrix w(dims[i], dims[i + 1]);
    for (double& v : w.values()) v = get_f64(in);
    Vector b(dims[i + 1]);
    for (double& v : b) v = get_f64(in);
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
  return MlpClassifier::from_parameters(std::move(dims), std::move(weights), std::move(biases));
}

void save_checkpoint(const std::filesystem::path& path, const MlpClassifier& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_checkpoint(out, model);
}

MlpClassifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace ddcl
