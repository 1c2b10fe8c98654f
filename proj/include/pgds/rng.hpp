#pragma once

#include <cstdint>
#include <random>

namespace pgds {

// Deterministic random stream. Identical (seed, stream, call sequence)
// triples replay the same draws; distinct stream ids give statistically
// independent substreams. Single-owner: not safe to share across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1); never returns an endpoint, so
  // log(uniform()) and log1p(-uniform()) are always finite.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Derived stream for an independent unit of work (parallel chain, worker).
  RngStream substream(std::uint64_t offset) const {
    return RngStream(seed_, stream_ * 0x9E3779B97F4A7C15ull + offset + 1);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace pgds
