#ifndef BOUNDARY_LAB_RNG_HPP_
#define BOUNDARY_LAB_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace boundary_lab {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based 64-bit generator: the i-th output is a pure function of
// (key, i), so a stream is fully described by its key and any number of
// streams can be derived without shared state. Satisfies
// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGoldenGamma);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Derives a stream key from a master seed and a path of indices, e.g.
// (master, n, replication). Distinct paths give unrelated keys.
inline std::uint64_t derive_stream(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = detail::mix64(master + detail::kGoldenGamma);
  for (std::uint64_t index : path) {
    key = detail::mix64(key ^ detail::mix64(index + 0x632be59bd9b4e019ULL));
  }
  return key;
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_RNG_HPP_
