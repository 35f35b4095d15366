#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace snslab {

/// Purpose tags separating independent substreams of one trajectory.
enum class StreamPurpose : std::uint32_t {
  Dynamics = 1,
  BurnIn = 2,
  OuSample = 3,
  Increment = 4,
  Test = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based stream: the key is a hash of (master seed, trajectory index,
/// purpose) and every draw is a pure function of (key, block index). Streams
/// can therefore be reopened at any block, which the integrator uses to
/// regenerate the noise of a given time step.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t trajectory,
            StreamPurpose purpose = StreamPurpose::Dynamics);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform in (0, 1).
  double uniform();
  /// Standard normal (Box-Muller; two normals per 128-bit block).
  double normal();
  void fill_normal(std::span<double> out);

  /// Repositions the stream at block `block` of sub-counter `lane`.
  void seek(std::uint64_t lane, std::uint64_t block = 0);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t trajectory() const { return trajectory_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t trajectory_;
  std::array<std::uint32_t, 2> key_;
  std::uint64_t lane_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace snslab
