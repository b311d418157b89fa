#ifndef UIND_RNG_HPP
#define UIND_RNG_HPP

#include <cstdint>

namespace uind {

// Counter-based generator keyed by (seed, stream, counter). Every draw is a
// pure function of the key, so parallel consumers with distinct streams are
// reproducible on any platform and any shard count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() {
    std::uint64_t x = seed_ + 0x9e3779b97f4a7c15ull * (stream_ + 1);
    x = mix(x);
    x ^= mix(counter_++ + 0xbf58476d1ce4e5b9ull);
    return mix(x);
  }

  // Unbiased-enough fixed-point mapping; avoids platform-dependent
  // distribution implementations.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exact Bernoulli(num/den) without floating point.
  bool bernoulli(std::uint64_t num, std::uint64_t den) { return next_below(den) < num; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Stream ids keep concurrent uses of one seed independent.
namespace stream {
constexpr std::uint64_t kEnv = 1;
constexpr std::uint64_t kPolicy = 2;
constexpr std::uint64_t kSensor = 3;
constexpr std::uint64_t kData = 4;
constexpr std::uint64_t kInit = 5;
}  // namespace stream

}  // namespace uind

#endif
