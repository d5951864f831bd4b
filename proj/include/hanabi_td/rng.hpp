#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>

namespace hanabi {

/// Identification string recorded in run manifests. Both the engine shuffle
/// and agent exploration draw from std::mt19937_64, whose output sequence is
/// fixed by the C++ standard, so runs are reproducible across toolchains.
inline constexpr std::string_view kPrngName =
    "std::mt19937_64; bounded draws by rejection sampling; "
    "Fisher-Yates shuffle from the back; seeds split with splitmix64";

/// One splitmix64 output for the given state value.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed splitting: an independent seed for (stream, index) under a master
/// seed. Stream 0 is game deals; streams 1 and 2 are the agents in seat 0/1.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

namespace seed_stream {
inline constexpr std::uint64_t kGames = 0;
inline constexpr std::uint64_t kSeat0 = 1;
inline constexpr std::uint64_t kSeat1 = 2;
}  // namespace seed_stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). Uses rejection so the result does not depend
  /// on library-specific distribution implementations.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace hanabi
