#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace vm {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a pure
// function of (key, counter), so any (seed, stream, position) is reachable directly.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Sequential view over one Philox stream. The 64-bit seed is the key; the 64-bit
// stream id occupies the upper half of the counter and the draw position the lower.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal();
  // Uniform integer in [0, n), unbiased (rejection sampling). n > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  // Number of trials until first success, support {1, 2, ...}, mean 1/p.
  int geometric(double p);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;  // 32-bit words consumed from block_
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Packs a (purpose, entity, slot) triple into a stream id: 8 | 32 | 24 bits.
constexpr std::uint64_t stream_id(std::uint8_t purpose, std::uint32_t entity, std::uint32_t slot) {
  return (static_cast<std::uint64_t>(purpose) << 56) | (static_cast<std::uint64_t>(entity) << 24) |
         (slot & 0xFFFFFFu);
}

// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed, std::uint64_t stream);

}  // namespace vm
