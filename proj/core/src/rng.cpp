#include "gibbsmix/rng.hpp"

#include "gibbsmix/density.hpp"

namespace gibbsmix {
namespace {

std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x6a09e667u};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      engine_(keyed_engine(master_seed, stream_index)) {}

double RandomStream::normal(double sd) { return sd * normal_quantile(uniform()); }

}  // namespace gibbsmix
