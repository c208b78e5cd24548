#include "crm/rng.hpp"

#include <bit>

namespace crm {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t sm = mix64(seed) ^ std::rotl(mix64(stream_id ^ 0x6a09e667f3bcc909ULL), 17);
  for (auto& word : s_) word = splitmix64(sm);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  // 52 random mantissa bits, shifted by half an ulp: (k + 0.5) / 2^52.
  return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
}

RngStream RngStream::substream(std::uint64_t child) const {
  return RngStream(seed_, mix64(stream_id_ * 0x9e3779b97f4a7c15ULL + mix64(child + 1)));
}

}  // namespace crm
