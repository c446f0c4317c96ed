#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ddcl {

// Mixes a base seed with a stream tag (splitmix64 finalizer) so that independent
// consumers of randomness never share a generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fully specified by the standard; the distributions below are written out here
// because the std:: ones are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal (Box-Muller, one spare cached).
  double normal();
  // Uniform integer on [0, n); n must be positive.
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ddcl
