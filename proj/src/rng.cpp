#include "cdslab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cdslab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

void RngSubstream::normals(std::uint64_t step, std::span<double> out) const {
  if (step >> 32) throw std::out_of_range("step index exceeds the counter range");
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const std::size_t n = out.size();
  for (std::size_t block = 0; 2 * block < n; ++block) {
    Philox4x32::Counter ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(block),
                            static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)};
    auto r = Philox4x32::generate(ctr, key);
    double u1 = to_unit_open_closed((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
    double u2 = to_unit_open_closed((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
    // Box-Muller
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    out[2 * block] = radius * std::cos(angle);
    if (2 * block + 1 < n) out[2 * block + 1] = radius * std::sin(angle);
  }
}

}  // namespace cdslab
