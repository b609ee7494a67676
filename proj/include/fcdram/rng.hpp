#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace fcdram {

std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** with splitmix64 seeding. Normal draws use Box-Muller so the
// stream is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent stream keyed by a seed and a tuple of identifiers.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

  std::uint64_t next();
  double uniform();  // [0, 1)
  std::uint64_t below(std::uint64_t bound);
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  void fill_normal(std::span<double> out, double sigma);
  void fill_bits(std::span<std::uint8_t> out);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fcdram
