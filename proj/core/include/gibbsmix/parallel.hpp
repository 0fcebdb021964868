#pragma once

#include <cstddef>
#include <functional>

namespace gibbsmix {

/// Caps worker threads used by every parallel loop in the library.
/// 0 restores the default (hardware concurrency). Results never depend on
/// this value: work is always split into the same fixed chunks and reduced
/// in chunk order.
void set_max_threads(unsigned threads) noexcept;
unsigned max_threads() noexcept;

/// Calls body(chunk) exactly once for each chunk in [0, chunks).
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

/// Number of fixed-size chunks covering `count` items.
constexpr std::size_t chunk_count(std::size_t count, std::size_t chunk) {
  return (count + chunk - 1) / chunk;
}

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace gibbsmix
