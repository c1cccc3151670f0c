#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "antmesh/errors.hpp"

namespace antmesh {

namespace detail {

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// A named, reproducible random stream.
///
/// The generator is xoshiro256** seeded through splitmix64 from
/// (master seed, stream name). All conversions to reals and bounded integers
/// are done here rather than through <random> distributions, whose output is
/// implementation-defined; draws are therefore identical across standard
/// libraries as well as across runs.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string name)
      : name_(std::move(name)) {
    std::uint64_t sm = master_seed ^ detail::fnv1a(name_);
    for (auto& word : s_) word = detail::splitmix64(sm);
  }

  const std::string& name() const noexcept { return name_; }
  std::uint64_t draws() const noexcept { return draws_; }

  std::uint64_t next_u64() noexcept {
    ++draws_;
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi]. Throws InvalidRange when lo > hi.
  double uniform(double lo, double hi) {
    if (lo > hi) throw InvalidRange("uniform: lo > hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * next_unit();
    return v > hi ? hi : v;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidRange("below: empty range");
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return next_unit() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::string name_;
  std::uint64_t s_[4]{};
  std::uint64_t draws_ = 0;
};

/// Owns every stream of one run. Streams are created lazily by name, and a
/// stream's sequence depends only on (master seed, name), so adding a
/// consumer never perturbs the draws of another.
class RandomStreams {
 public:
  explicit RandomStreams(std::uint64_t master_seed = 1) : seed_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return seed_; }

  RngStream& stream(const std::string& name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) {
      it = streams_.emplace(name, std::make_unique<RngStream>(seed_, name)).first;
    }
    return *it->second;
  }

 private:
  std::uint64_t seed_;
  std::map<std::string, std::unique_ptr<RngStream>, std::less<>> streams_;
};

}  // namespace antmesh
