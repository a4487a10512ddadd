#ifndef METFA_RNG_HPP
#define METFA_RNG_HPP

#include <cstdint>
#include <random>

namespace metfa {

// Which consumer a stream belongs to. Distinct purposes never share draws
// even under the same seed and index.
enum class StreamPurpose : std::uint32_t {
  kSample = 1,      // one sampled explanation (noise + attributor)
  kTieBreak = 2,    // tie-break perturbation of one feature column
  kMetricDraw = 3,  // one outer-noise draw of a robust metric
  kOuterNoise = 4,  // one noisy input of a stability comparison
};

// Deterministic random stream keyed by (seed, purpose, index, subindex).
// The draw sequence depends only on the key, so streams may be consumed on
// any thread in any order.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index,
            std::uint64_t subindex = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(subindex),
                      static_cast<std::uint32_t>(subindex >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace metfa

#endif  // METFA_RNG_HPP
