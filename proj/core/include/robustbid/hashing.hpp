#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <string_view>

namespace robustbid {

// 64-bit FNV-1a. Used for feature hashing, sub-stream seed derivation and
// file checksums, so the exact constants matter: outputs are part of the
// on-disk format and must not change.
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t state = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t state = kFnvOffset) {
  return fnv1a64(s.data(), s.size(), state);
}

// Feeds an integer as 8 big-endian bytes, so the digest is independent of
// host byte order.
inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t state = kFnvOffset) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (56 - 8 * i));
  return fnv1a64(buf, 8, state);
}

// Finalizer with full avalanche (splitmix64). FNV-1a alone barely moves the
// high bits when inputs differ only in their last bytes, which matters when
// a single output bit is consumed.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

std::uint64_t fnv1a64_file(const std::string& path);

std::string to_hex(std::uint64_t v);

}  // namespace robustbid
