#include "fcdram/rng.hpp"

#include <cmath>
#include <numbers>

#include "fcdram/error.hpp"

namespace fcdram {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::NotAdjacent: return "not-adjacent";
    case ErrorCode::CapabilityUnsupported: return "capability-unsupported";
    case ErrorCode::NotActivated: return "not-activated";
    case ErrorCode::MalformedTrace: return "malformed-trace";
    case ErrorCode::PatternMismatch: return "pattern-mismatch";
    case ErrorCode::AmbiguousOrder: return "ambiguous-order";
    case ErrorCode::Io: return "io-failure";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
}

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = seed;
  std::uint64_t key = splitmix64(h);
  for (std::uint64_t id : ids) {
    std::uint64_t m = key ^ (id * 0xd6e8feb86659fd93ULL);
    key = splitmix64(m);
  }
  return Rng(key);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void Rng::fill_normal(std::span<double> out, double sigma) {
  if (sigma == 0.0) {
    for (double& v : out) v = 0.0;
    return;
  }
  for (double& v : out) v = sigma * normal();
}

void Rng::fill_bits(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = next();
    for (int b = 0; b < 64 && i < out.size(); ++b, ++i) out[i] = static_cast<std::uint8_t>((word >> b) & 1U);
  }
}

}  // namespace fcdram
