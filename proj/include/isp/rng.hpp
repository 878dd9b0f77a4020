#pragma once

#include <cstdint>
#include <random>

namespace isp {

/// Maximum number of aggregated components per path; fixes the substream layout.
inline constexpr std::uint64_t kMaxComponents = 64;

/// Stream id of (path, component): path * kMaxComponents + component.
constexpr std::uint64_t substream_id(std::uint64_t path, std::uint64_t component) {
  return path * kMaxComponents + component;
}

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// A reproducible random stream.
///
/// Stream (seed, id) seeds an mt19937_64 from four splitmix64 words derived
/// from seed and id, so distinct ids give statistically independent streams
/// and identical (seed, id) pairs give identical draws on every platform with
/// the same standard library. Uniforms are built from the top 53 bits, normals
/// by Box-Muller (two uniforms, no caching), so the number of engine calls per
/// draw is fixed.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos();
  double normal();
  double exponential();
  std::int64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace isp
