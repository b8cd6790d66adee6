#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>

namespace remlab {

/// Identifies one independent random stream of the counter-based generator.
///
/// `key` feeds the Philox key words and `stream` occupies the two upper
/// counter words, so every (key, stream) pair owns a disjoint 2^64-block
/// counter range.
struct StreamKey {
  std::uint64_t key = 0;
  std::uint64_t stream = 0;

  friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
};

/// Well-known stream labels. Labels are part of the seed derivation, so
/// changing a value here changes every result that uses it.
enum class StreamLabel : std::uint32_t {
  energies = 0,
  point_process = 1,
  stick_breaking = 2,
  retry = 3,
  sampler = 4,
};

/// Largest replica id accepted by seed_derivation.
inline constexpr std::uint64_t kMaxReplicaId = (std::uint64_t{1} << 48) - 1;

/// Maps (master_seed, replica_id, stream_label) to a stream key.
///
/// The mapping is key = mix(master_seed), stream = mix(replica_id << 16 | label),
/// where mix is the SplitMix64 finalizer (a bijection on 64-bit words). It is
/// injective for replica_id <= kMaxReplicaId and label < 2^16 and is frozen:
/// tests/data/seed_keys_42.txt pins its output.
StreamKey seed_derivation(std::uint64_t master_seed, std::uint64_t replica_id,
                          std::uint32_t stream_label);

inline StreamKey seed_derivation(std::uint64_t master_seed, std::uint64_t replica_id,
                                 StreamLabel label) {
  return seed_derivation(master_seed, replica_id, static_cast<std::uint32_t>(label));
}

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// Philox4x32-10 (Salmon et al., Random123).
constexpr PhiloxBlock philox4x32(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

/// Block `position` of the stream identified by `key`.
constexpr PhiloxBlock philox_block(const StreamKey& key, std::uint64_t position) noexcept {
  return philox4x32({static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(position >> 32),
                     static_cast<std::uint32_t>(key.stream),
                     static_cast<std::uint32_t>(key.stream >> 32)},
                    {static_cast<std::uint32_t>(key.key), static_cast<std::uint32_t>(key.key >> 32)});
}

/// Maps 64 random bits to a double in the open interval (0, 1).
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

/// Sequential view of one counter-based stream. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
///
/// Block positions are split as (low 32 bits, high 32 bits) of the counter.
/// With `stride` 2^32 the stream walks "index i, draw j" as position
/// i + (j << 32), which is how the engine gives every configuration its own
/// substream.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream() = default;
  explicit CounterStream(StreamKey key, std::uint64_t position = 0,
                         std::uint64_t stride = 1) noexcept
      : key_(key), position_(position), stride_(stride) {}

  /// Substream owned by configuration `index` under `key`.
  static CounterStream for_index(StreamKey key, std::uint64_t index) noexcept {
    return CounterStream(key, index, std::uint64_t{1} << 32);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (lane_ == 2) {
      block_ = philox_block(key_, position_);
      position_ += stride_;
      lane_ = 0;
    }
    const std::uint64_t hi = block_[2 * lane_];
    const std::uint64_t lo = block_[2 * lane_ + 1];
    ++lane_;
    return (hi << 32) | lo;
  }

  /// Uniform draw in (0, 1).
  double uniform() noexcept { return to_open_unit((*this)()); }

  const StreamKey& key() const noexcept { return key_; }

 private:
  StreamKey key_{};
  std::uint64_t position_ = 0;
  std::uint64_t stride_ = 1;
  PhiloxBlock block_{};
  int lane_ = 2;
};

}  // namespace remlab
