#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace actir {

/// SplitMix64 generator. Chosen over <random> engines because its output is
/// fully specified by the algorithm, so datasets built from a seed are
/// bit-identical on every platform. Independent streams are derived by
/// hashing a label into the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Sample `count` distinct indices from [0, n) by partial Fisher-Yates.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

  std::vector<std::size_t> permutation(std::size_t n) { return sample_without_replacement(n, n); }

  /// Fork an independent stream keyed by a label, e.g. one per domain.
  Rng stream(const std::string& label) const;

 private:
  std::uint64_t state_;
};

inline std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t count) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

inline Rng Rng::stream(const std::string& label) const {
  // FNV-1a over the label, mixed with the current state through one
  // SplitMix64 scramble so that streams with different labels diverge.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  Rng forked(state_ ^ h);
  forked.next_u64();
  return forked;
}

}  // namespace actir
