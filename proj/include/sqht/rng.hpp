#ifndef SQHT_RNG_HPP
#define SQHT_RNG_HPP

#include <cstdint>

namespace sqht {

// Counter-based stream generator (splitmix64 over a Weyl sequence). Each
// output is a hash of key + k*gamma, so streams keyed by (seed, hypothesis,
// trial index) are independent of evaluation order and worker count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_u64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

// Derives an independent stream key from a master seed and tags.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix_u64(master ^ mix_u64(tag + 0x9E3779B97F4A7C15ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag_a,
                                 std::uint64_t tag_b) {
  return derive_seed(derive_seed(master, tag_a), tag_b);
}

}  // namespace sqht

#endif
