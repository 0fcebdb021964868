#pragma once

#include <cstdint>
#include <random>

namespace gibbsmix {

/// Independent random stream for one trajectory.
///
/// Streams are keyed by (master seed, stream index) through std::seed_seq, so
/// trajectory i draws the same numbers no matter which worker runs it or in
/// which order trajectories are scheduled.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }
  /// Fair coin.
  bool coin() noexcept { return (engine_() >> 63) != 0; }
  /// N(0, sd^2) by inversion.
  double normal(double sd);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

}  // namespace gibbsmix
