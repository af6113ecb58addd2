// Counter-based random generator. Every draw is a hash of (key, counter), so
// independently-seeded streams can be generated in parallel in any order and
// still reproduce bitwise.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace frostlab {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive an independent sub-seed, e.g. one per scan point or per stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL));
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log argument.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller; the second value of each pair is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = next_unit_open();
    const double v = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double phi = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  // Index in [0, n) without modulo bias (Lemire reduction).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace frostlab
