#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace bdsurvey {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Pure function of (key, counter); used through RngStream.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// A reproducible random stream. Streams are identified by
/// (master seed, replicate id, purpose tag); distinct identities give
/// independent streams, identical identities give bit-identical output.
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t key, std::uint64_t stream_id);

  static RngStream derive(std::uint64_t master_seed, std::uint64_t replicate_id,
                          std::string_view purpose);

  /// Child stream for a sub-task; deterministic in (this stream's identity, tag).
  RngStream split(std::string_view tag) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard exponential.
  double exponential();
  /// Standard normal (Box-Muller, no cached second deviate).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// 64-bit FNV-1a, used for purpose tags and config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace bdsurvey
