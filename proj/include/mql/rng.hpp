#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mql {

// MT19937 stream with numpy-compatible bounded draws and shuffling, so a
// permutation drawn here equals `numpy.random.RandomState(seed).permutation(n)`.
// std::mt19937's output sequence is fixed by the standard; distributions are
// implemented locally because std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint32_t seed) : engine_(seed) {}

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_()); }
  std::uint64_t next_u64();

  // Uniform integer in [0, max] by masked rejection (numpy's random_interval).
  std::uint64_t interval(std::uint64_t max);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // In-place Fisher-Yates, last index first.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i >= 1; --i) {
      std::size_t j = static_cast<std::size_t>(interval(i));
      std::swap(v[i], v[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937 engine_;
};

// Derives an independent 32-bit seed for sub-stream `index` (per tree, per
// restart) from a base seed.
std::uint32_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace mql
