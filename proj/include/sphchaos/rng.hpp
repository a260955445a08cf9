#pragma once

#include <cstdint>
#include <random>

namespace sphchaos {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Generator state for stream `index` under `master`: a pure function of the
// pair, so replicas can be produced in any order on any worker.
inline std::mt19937_64 stream_engine(std::uint64_t master, std::uint64_t index) {
  std::uint64_t a = splitmix64(master);
  std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632BE59BD9B4E019ull));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace sphchaos
