#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace gfl {

// 64-bit finalizer used to derive independent RNG streams from key tuples.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unrelated seed for a sub-purpose (graph draw vs series draw, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

struct StreamId {
  std::int64_t node = -1;
  std::int64_t iter = -1;
  std::int64_t sample = -1;
};

// Deterministic random stream keyed by a base seed plus a
// (node, iteration, sample) stream id. Identical keys reproduce identical
// draws regardless of what any other stream has consumed. Normals use an
// explicit Box-Muller so draws do not depend on the standard library's
// distribution implementation.
class RngStream {
 public:
  using Id = StreamId;

  explicit RngStream(std::uint64_t seed, Id id = Id()) : seed_(seed), id_(id) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ (static_cast<std::uint64_t>(id.node) + 0x9249u));
    s = splitmix64(s ^ (static_cast<std::uint64_t>(id.iter) + 0x30c3u));
    s = splitmix64(s ^ (static_cast<std::uint64_t>(id.sample) + 0xc0f3u));
    gen_.seed(s);
  }

  // Same (seed, node, iter) key with a different sample index.
  RngStream substream(std::int64_t sample) const {
    return RngStream(seed_, Id{id_.node, id_.iter, sample});
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal, Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  std::int64_t uniform_int(std::int64_t n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % un;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  std::uint64_t seed() const { return seed_; }
  const Id& id() const { return id_; }

 private:
  std::uint64_t seed_;
  Id id_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gfl
