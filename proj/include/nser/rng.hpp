#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace nser {

// Deterministic random stream. All distributions are hand-rolled on top of
// std::mt19937_64 so that sequences are identical across platforms and
// standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n) { return engine_() % n; }

  // Uniform real in [0, 1).
  double uniform_real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform real in [lo, hi).
  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform_real();
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct elements of v, order randomized. If k >= v.size() returns a
  // permutation of v.
  template <typename T>
  std::vector<T> sample(const std::vector<T>& v, size_t k) {
    std::vector<T> pool = v;
    if (k > pool.size()) k = pool.size();
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(uniform_int(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a root seed and a stream name, so
// every stochastic component can be varied independently of the others.
uint64_t substream_seed(uint64_t root_seed, std::string_view name);

inline Rng substream(uint64_t root_seed, std::string_view name) {
  return Rng(substream_seed(root_seed, name));
}

}  // namespace nser
