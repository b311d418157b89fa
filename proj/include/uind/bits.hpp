#ifndef UIND_BITS_HPP
#define UIND_BITS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uind {

// Bit strings are plain std::string over '0'/'1'; this is also their
// on-disk and report rendering.
using Bits = std::string;

inline bool is_bits(std::string_view s) {
  for (char c : s)
    if (c != '0' && c != '1') return false;
  return true;
}

inline void require_bits(std::string_view s, const char* what = "bit string") {
  if (!is_bits(s)) throw std::invalid_argument(std::string(what) + " contains characters other than 0/1");
}

// FNV-1a, used for cache keys, dataset digests and report config digests.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace uind

#endif
