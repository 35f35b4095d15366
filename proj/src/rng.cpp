#include "snslab/rng.hpp"

#include <cmath>
#include <numbers>

namespace snslab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t trajectory, StreamPurpose purpose)
    : seed_(master_seed), trajectory_(trajectory) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ trajectory);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  key_ = {std::uint32_t(h), std::uint32_t(h >> 32)};
}

void RngStream::seek(std::uint64_t lane, std::uint64_t block) {
  lane_ = lane;
  block_ = block;
  used_ = 4;
  has_spare_ = false;
}

void RngStream::refill() {
  buffer_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(lane_),
                        std::uint32_t(lane_ >> 32)},
                       key_);
  ++block_;
  used_ = 0;
}

RngStream::result_type RngStream::operator()() {
  if (used_ > 2) refill();
  const std::uint64_t v = (std::uint64_t(buffer_[used_]) << 32) | buffer_[used_ + 1];
  used_ += 2;
  return v;
}

double RngStream::uniform() {
  // 53 random bits, shifted off zero
  return (double((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& x : out) x = normal();
}

}  // namespace snslab
