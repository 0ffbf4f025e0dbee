// 64-bit multiply-xor digest over message bits, plus the pluggable hook the
// protocol's DoS check goes through.  The built-in digest is fixed
// bit-exactly so transcripts are stable across builds; production-grade hash
// functions can be slotted in through DigestFn.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qpkc::proto {

inline constexpr std::uint64_t kDigestOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kDigestPrime = 0x00000100000001B3ULL;

// state <- (state XOR bit) * prime  (mod 2^64), over the bits in order.
inline std::uint64_t test_digest(std::span<const int> bits) {
  std::uint64_t state = kDigestOffset;
  for (int b : bits) {
    state = (state ^ static_cast<std::uint64_t>(b)) * kDigestPrime;
  }
  return state;
}

using DigestFn = std::function<std::uint64_t(std::span<const int>)>;

inline constexpr std::size_t kDigestBits = 64;

// Digest serialized most-significant bit first.
inline std::vector<int> digest_bits(std::uint64_t digest) {
  std::vector<int> bits(kDigestBits);
  for (std::size_t i = 0; i < kDigestBits; ++i) {
    bits[i] = static_cast<int>((digest >> (kDigestBits - 1 - i)) & 1u);
  }
  return bits;
}

}  // namespace qpkc::proto
