#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace heatsheet {

// Counter-based random number generation (Philox4x32-10).
//
// Streams are keyed by (master seed, replica index, purpose tag). Identical
// keys reproduce identical draw sequences; distinct keys give statistically
// independent sequences because they index disjoint counter blocks of the
// same keyed bijection. This is what makes replica-parallel Monte Carlo
// reproducible regardless of scheduling.

// Stable 32-bit id for a short purpose tag (FNV-1a). The mapping is part of
// the reproducibility contract and must not change between versions.
constexpr std::uint32_t purpose_id(std::string_view tag) {
  std::uint32_t h = 2166136261u;
  for (char c : tag) {
    h ^= static_cast<std::uint32_t>(static_cast<unsigned char>(c));
    h *= 16777619u;
  }
  return h;
}

struct StreamKey {
  std::uint64_t master = 0;
  std::uint32_t replica = 0;
  std::uint32_t purpose = 0;

  bool operator==(const StreamKey&) const = default;
};

// seed_derive: injective map (master, replica, purpose) -> counter-block key.
// replica and purpose occupy the two fixed high words of the Philox counter,
// so distinct stream keys can never produce overlapping counter blocks.
inline StreamKey seed_derive(std::uint64_t master, std::uint32_t replica,
                             std::string_view purpose) {
  return StreamKey{master, replica, purpose_id(purpose)};
}

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

} // namespace detail

// A single Philox stream. Produces uniforms on (0,1) and standard normals
// (Box-Muller); both sequences are pure functions of the stream key and the
// internal draw counter.
class RngStream {
public:
  RngStream() = default;
  explicit RngStream(StreamKey key) : key_(key) {}

  RngStream(std::uint64_t master, std::uint32_t replica, std::string_view purpose)
      : RngStream(seed_derive(master, replica, purpose)) {}

  const StreamKey& key() const { return key_; }

  std::uint64_t next_u64() {
    if (buffered_ == 0) refill();
    return buf_[--buffered_];
  }

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_counter_),
        static_cast<std::uint32_t>(block_counter_ >> 32), key_.replica,
        key_.purpose};
    const std::array<std::uint32_t, 2> k = {
        static_cast<std::uint32_t>(key_.master),
        static_cast<std::uint32_t>(key_.master >> 32)};
    const auto out = detail::philox4x32_10(ctr, k);
    buf_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
    ++block_counter_;
  }

  StreamKey key_;
  std::uint64_t block_counter_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

inline double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

// Factory bound to (master seed, replica): hands out purpose-tagged streams.
class StreamSet {
public:
  StreamSet(std::uint64_t master, std::uint32_t replica)
      : master_(master), replica_(replica) {}

  RngStream stream(std::string_view purpose) const {
    return RngStream(master_, replica_, purpose);
  }

  std::uint64_t master() const { return master_; }
  std::uint32_t replica() const { return replica_; }

private:
  std::uint64_t master_;
  std::uint32_t replica_;
};

} // namespace heatsheet
