#pragma once

#include <cstdint>
#include <random>

namespace prepost {

/// One step of the splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent stream identified by (seed, index, attempt).
/// Streams for distinct tuples are decorrelated by repeated splitmix64 mixing.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0);

/// mt19937_64 with Box-Muller normals and unbiased bounded integers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace prepost
