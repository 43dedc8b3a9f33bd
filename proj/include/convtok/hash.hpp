#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace convtok {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed hash of a record id: stable across platforms and runs.
constexpr std::uint64_t keyed_hash(std::string_view id, std::uint64_t seed) {
  return splitmix64(fnv1a64(id) ^ splitmix64(seed));
}

// Incremental checksum over a stream of strings; each item is length-prefixed
// so that ["ab","c"] and ["a","bc"] differ.
class Checksum {
 public:
  void update(std::string_view item) {
    std::uint64_t n = item.size();
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(n >> (8 * i));
      state_ *= kFnvPrime;
    }
    state_ = fnv1a64(item, state_);
  }
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = kFnvOffset;
};

std::string to_hex(std::uint64_t v);

}  // namespace convtok
