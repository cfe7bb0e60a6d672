#pragma once

#include <cstdint>
#include <random>

namespace fou {

/// Seeded random stream with a fixed splitting rule.
///
/// Stream (seed, index) is a std::mt19937_64 seeded through std::seed_seq
/// with the words {seed_lo, seed_hi, index_lo, index_hi, domain}. Both
/// engines and seed_seq are fully specified by the standard, and the
/// uniform and normal transforms below are written out by hand (the
/// std::*_distribution algorithms are implementation-defined), so the
/// same (seed, index, domain) reproduces the same draws on every platform.
/// Replication r of an experiment uses index r.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index, std::uint32_t domain = 0);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1), never returns 0.
  double uniform_open();
  /// Standard normal via the Marsaglia polar method.
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Domain tags keep streams of different consumers disjoint for one seed.
namespace stream_domain {
inline constexpr std::uint32_t kSheet = 1;
inline constexpr std::uint32_t kLemmaIntegral = 2;
inline constexpr std::uint32_t kLemmaIntegralS = 3;
inline constexpr std::uint32_t kBesselCheck = 4;
}  // namespace stream_domain

}  // namespace fou
