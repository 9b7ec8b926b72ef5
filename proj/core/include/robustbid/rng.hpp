#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "robustbid/hashing.hpp"

namespace robustbid {

// All randomness in the system flows from one 64-bit master seed through
// named sub-streams. A sub-stream seed is a digest of the master seed, a
// stream name and up to two integer qualifiers (reviewer index, trial id,
// ...). Work items can therefore be processed in any order, or on any
// thread, without changing what each item draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a64_u64(master);
  h = fnv1a64(stream, h);
  h = fnv1a64_u64(a, h);
  h = fnv1a64_u64(b, h);
  // fnv never returns 0 in practice, but the engine dislikes seed 0 anyway
  return h == 0 ? 0x9e3779b97f4a7c15ull : h;
}

// mt19937_64 plus hand-rolled bounded draws. The helpers avoid
// std::uniform_int_distribution, whose output sequence is not pinned by the
// standard; these are, so results reproduce across library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased draw in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return real01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in selection order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

inline std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k > n) k = n;
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace robustbid
