#include "isp/rng.hpp"

#include <cmath>
#include <numbers>

namespace isp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform_pos() { return 1.0 - uniform(); }

double RngStream::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential() { return -std::log(uniform_pos()); }

std::int64_t RngStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine_);
}

}  // namespace isp
