#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace statlim {

/// SplitMix64 finaliser. Used to turn structured seeds into well-mixed ones.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `index` of `master`: splitmix64(splitmix64(master) ^ index').
/// Chaining (derive_seed(derive_seed(m, a), b)) gives a splittable tree of streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Rest... rest) noexcept {
  return derive_seed(derive_seed(master, index), static_cast<std::uint64_t>(rest)...);
}

/// Portable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not (libstdc++ and libc++ differ),
/// so every transform used by the library is implemented here:
///   uniform(): top 53 bits of one engine draw, scaled to [0, 1).
///   normal():  Marsaglia polar method, spare value cached.
///   below(n):  modulo with rejection of the biased tail.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  std::size_t below(std::size_t n);

  /// Uniformly distributed direction on the unit sphere in R^d (d >= 1).
  Eigen::VectorXd unit_vector(Eigen::Index d);

  /// In-place Fisher-Yates prefix: after the call the first k entries are a
  /// uniform sample without replacement, in random order.
  void shuffle_prefix(std::span<std::size_t> items, std::size_t k);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace statlim
