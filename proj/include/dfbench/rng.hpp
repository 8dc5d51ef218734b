#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace dfbench {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Reproducible random stream keyed by (master_seed, stream_id).
///
/// Engine: std::mt19937_64. Distributions are implemented in-house; sequences
/// are identical across toolchains.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  const std::string& stream_id() const { return stream_id_; }

  /// Independent stream with id `stream_id + "/" + suffix`.
  RngStream child(std::string_view suffix) const;
  /// Cheap numbered sub-stream (per-row noise in the parallel kernels).
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal via the Marsaglia polar method.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t poisson(double lambda);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  RngStream(std::uint64_t master_seed, std::string stream_id, std::uint64_t key);

  std::uint64_t master_seed_;
  std::string stream_id_;
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace dfbench
