#pragma once

// Reproducible random streams. Every (seed, stream, chunk) triple owns an independent
// mt19937_64 seeded through std::seed_seq, so results do not depend on how chunks are
// scheduled across threads.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mdlvq {

enum class Stream : std::uint32_t { Source = 1, Erasure = 2 };

inline constexpr std::string_view kGaussianMethod = "marsaglia-polar/mt19937_64/seed_seq(seed_lo,seed_hi,stream,chunk)";

class StreamRng {
 public:
  StreamRng(std::uint64_t seed, Stream stream, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(chunk),
                      static_cast<std::uint32_t>(chunk >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by the Marsaglia polar method; the second variate of each pair is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mdlvq
