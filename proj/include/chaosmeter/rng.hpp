#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace chaosmeter {

/// Philox4x32-10 counter-based block cipher (Salmon et al. constants).
/// Stateless: the same (counter, key) pair always yields the same block,
/// which makes draws addressable and independent of evaluation order.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      const Counter next = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                            static_cast<std::uint32_t>(p1),
                            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                            static_cast<std::uint32_t>(p0)};
      ctr = next;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

namespace detail {
inline double u64_to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t v = (std::uint64_t(hi) << 32) | lo;
  // 53-bit mantissa, offset by half an ulp so the result lies in (0,1).
  return (double(v >> 11) + 0.5) * 0x1p-53;
}
}  // namespace detail

/// Addressable stream of random doubles derived from (seed, stream).
/// `index` and `slot` name a position in the stream; any (index, slot) may be
/// queried in any order from any thread.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Two independent uniforms in (0,1) at one address.
  std::pair<double, double> uniform_pair(std::uint64_t index, std::uint32_t slot) const {
    const auto w = Philox4x32::block({slot, static_cast<std::uint32_t>(index),
                                      static_cast<std::uint32_t>(index >> 32), stream_},
                                     key_);
    return {detail::u64_to_unit_open(w[0], w[1]), detail::u64_to_unit_open(w[2], w[3])};
  }

  double uniform(std::uint64_t index, std::uint32_t slot) const {
    return uniform_pair(index, slot).first;
  }

  /// Two standard normals (Box-Muller) at one address.
  std::pair<double, double> normal_pair(std::uint64_t index, std::uint32_t slot) const {
    const auto [u1, u2] = uniform_pair(index, slot);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t stream_;
};

/// Sequential convenience adapter over RandomStream; not thread-safe.
class SequentialRng {
 public:
  SequentialRng(std::uint64_t seed, std::uint32_t stream) : stream_(seed, stream) {}

  double uniform() { return stream_.uniform(next_++, 0); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto [z0, z1] = stream_.normal_pair(next_++, 0);
    spare_ = z1;
    have_spare_ = true;
    return z0;
  }

  /// Uniform integer in [0, bound) by rejection-free scaling (bound <= 2^32).
  std::uint64_t uniform_index(std::uint64_t bound) {
    return std::min<std::uint64_t>(bound - 1, std::uint64_t(uniform() * double(bound)));
  }

 private:
  RandomStream stream_;
  std::uint64_t next_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace chaosmeter
