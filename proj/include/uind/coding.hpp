#ifndef UIND_CODING_HPP
#define UIND_CODING_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uind/bits.hpp"

namespace uind {

// Elias gamma code for n >= 1: (B-1) zeros then the B binary digits of n.
inline Bits encode_nat(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("encode_nat requires n >= 1");
  int width = std::bit_width(n);
  Bits out(static_cast<std::size_t>(width - 1), '0');
  for (int b = width - 1; b >= 0; --b) out.push_back((n >> b) & 1 ? '1' : '0');
  return out;
}

inline std::size_t encode_nat_len(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("encode_nat requires n >= 1");
  return 2 * static_cast<std::size_t>(std::bit_width(n)) - 1;
}

// Canonical set encoding: elements deduplicated and sorted lexicographically,
// each prefixed with the gamma code of (length + 1) so the empty string is
// admissible as an element. The empty set encodes to the empty string.
inline Bits encode_set(std::vector<Bits> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  Bits out;
  for (const Bits& e : elements) {
    require_bits(e, "set element");
    out += encode_nat(e.size() + 1);
    out += e;
  }
  return out;
}

}  // namespace uind

#endif
