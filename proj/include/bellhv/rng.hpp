#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace bellhv {

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed of the substream identified by (seed, name).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  return splitmix64(seed ^ splitmix64(fnv1a64(name)));
}

// Deterministic named random stream. The same (seed, name) pair always
// produces the same sequence; distinct names give independent streams, so
// concurrent consumers each take their own stream and results do not depend
// on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name)
      : engine_(derive_seed(seed, name)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), built from the top 53 bits of the engine output.
  // std::uniform_real_distribution is not bit-portable; this is.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

inline RngStream derived_stream(std::uint64_t seed, std::string_view role,
                                std::uint64_t index) {
  std::string name(role);
  name += '/';
  name += std::to_string(index);
  return RngStream(seed, name);
}

}  // namespace bellhv
