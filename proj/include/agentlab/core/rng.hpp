#pragma once

#include <cstdint>
#include <string_view>

namespace agentlab {

// SplitMix64 stream. Children are derived from the stream's origin seed and a
// label, never from its current position, so drawing from one stream or adding
// a new child leaves every other stream's sequence unchanged.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : origin_(seed), state_(seed) {}

  RngStream child(std::string_view label) const;
  RngStream child(std::string_view label, std::uint64_t index) const;

  std::uint64_t origin() const { return origin_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t origin_;
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace agentlab
