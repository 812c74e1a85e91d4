#ifndef RSKIT_RNG_HPP
#define RSKIT_RNG_HPP

#include <array>
#include <cstdint>

namespace rskit {

/// Philox4x32-10 counter-based block function (Salmon, Moraes, Dror, Shaw,
/// SC'11). The output for a given (counter, key) is fixed forever, which is
/// what makes substreams reproducible regardless of thread scheduling.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static constexpr int kRounds = 10;

  static Counter block(Counter counter, Key key) noexcept;
};

/// A sequential view onto one Philox substream.
///
/// The key is the 64-bit user seed; counter words 2-3 hold the substream id
/// (usually the replication index), word 1 an optional purpose tag, and
/// word 0 the block index within the substream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t substream, std::uint32_t purpose = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by Box-Muller. Portable across standard libraries,
  /// unlike std::normal_distribution.
  double normal() noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace rskit

#endif  // RSKIT_RNG_HPP
