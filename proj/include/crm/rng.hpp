#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace crm {

// xoshiro256** keyed by (seed, stream_id). The state is derived by hashing
// both words through splitmix64, so neighbouring stream ids give unrelated
// sequences. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Independent child stream, deterministic in (seed, stream_id, child).
  RngStream substream(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> s_;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

}  // namespace crm
