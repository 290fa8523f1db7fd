#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace featiso {

/// Counter-based random stream keyed by (global seed, sample id, op name).
///
/// The n-th draw of a stream is a pure function of its key and n, so results
/// never depend on which thread touches which sample or in which order.
/// All distributions are implemented here rather than through <random> so the
/// produced sequences are identical across standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t global_seed, std::string_view sample_id, std::string_view op_name);
  explicit RngStream(std::uint64_t key) : key_(key) {}

  /// Independent child stream; does not advance this stream.
  [[nodiscard]] RngStream derive(std::string_view name) const;

  [[nodiscard]] std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Unbiased uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  bool coin() { return (next_u64() >> 63) != 0; }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // UniformRandomBitGenerator surface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// FNV-1a over bytes, then mixed.
std::uint64_t hash_string(std::string_view s);
/// Combines a seed with an index into an unrelated seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace featiso
