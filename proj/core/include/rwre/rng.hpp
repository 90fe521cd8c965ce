#pragma once

#include <cmath>
#include <cstdint>

namespace rwre {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based stream: the k-th draw of stream s under key seed is a pure
// function of (seed, s, k). Streams are addressed by signed site or step index.
class Stream {
 public:
  Stream(std::uint64_t seed, std::int64_t stream_id)
      : key_(splitmix64(seed ^ 0x6A09E667F3BCC909ULL) ^ splitmix64(static_cast<std::uint64_t>(stream_id) * 0xD1B54A32D192ED03ULL + 0x243F6A8885A308D3ULL)) {}

  std::uint64_t next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * (++ctr_)); }

  // Uniform on the open interval (0,1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal by Box-Muller (second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rwre
