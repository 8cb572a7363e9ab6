#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace cdslab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Stream of standard normal vectors for one path. The draw for step n is a
/// pure function of (seed, path, n), so paths can be evaluated in any order.
class RngSubstream {
 public:
  RngSubstream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

  /// Fills `out` with the normals of step n; component j of every step uses
  /// its own counter block so dimensions never overlap.
  void normals(std::uint64_t step, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t path() const { return path_; }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
};

/// Maps 64 random bits to a double in (0, 1].
inline double to_unit_open_closed(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace cdslab
