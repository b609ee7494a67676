#pragma once

#include <cstddef>
#include <cstdint>

// Column-parallel kernels over one amp array's columns. Every implementation
// must produce bit-identical results to the scalar one.
namespace fcdram::kernels {

struct Table {
  const char* name;
  // acc_wv += w * v; acc_w += w
  void (*share_accumulate)(double* acc_wv, double* acc_w, const double* v, const double* w, std::size_t n);
  // out = acc_w > 0 ? acc_wv / acc_w : prior
  void (*share_finalize)(double* out, const double* acc_wv, const double* acc_w, double prior, std::size_t n);
  // latch = ((top - bot) + offset + noise + kappa * ((left + right) - 1)) > 0,
  // where left/right are the neighbours' noiseless decisions (0.5 past the ends).
  // scratch must hold n doubles.
  void (*sense)(double* latch, const double* top, const double* bot, const double* offset, const double* noise,
                double kappa, double* scratch, std::size_t n);
  // out = fail ? v0 : v0 + fraction * (target - v0); fail may be null.
  void (*restore)(double* out, const double* v0, const double* target, double fraction, const std::uint8_t* fail,
                  std::size_t n);
  void (*scale)(double* out, const double* in, double factor, std::size_t n);
  // counts += ((v > 0.5) == expected)
  void (*tally)(std::uint32_t* counts, const double* v, const std::uint8_t* expected, std::size_t n);
};

const Table& scalar();
// Null when the build or the running CPU lacks AVX2.
const Table* avx2();
// The best table for this CPU unless FCDRAM_KERNELS=scalar is set.
const Table& best();

}  // namespace fcdram::kernels
