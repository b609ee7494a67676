#include "fcdram/kernels.hpp"

namespace fcdram::kernels {

namespace {

void share_accumulate(double* acc_wv, double* acc_w, const double* v, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    acc_wv[i] += w[i] * v[i];
    acc_w[i] += w[i];
  }
}

void share_finalize(double* out, const double* acc_wv, const double* acc_w, double prior, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = acc_w[i] > 0.0 ? acc_wv[i] / acc_w[i] : prior;
}

void sense(double* latch, const double* top, const double* bot, const double* offset, const double* noise,
           double kappa, double* scratch, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) scratch[i] = top[i] > bot[i] ? 1.0 : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = i > 0 ? scratch[i - 1] : 0.5;
    const double r = i + 1 < n ? scratch[i + 1] : 0.5;
    const double c = kappa * ((l + r) - 1.0);
    const double x = (((top[i] - bot[i]) + offset[i]) + noise[i]) + c;
    latch[i] = x > 0.0 ? 1.0 : 0.0;
  }
}

void restore(double* out, const double* v0, const double* target, double fraction, const std::uint8_t* fail,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double moved = v0[i] + fraction * (target[i] - v0[i]);
    out[i] = (fail != nullptr && fail[i]) ? v0[i] : moved;
  }
}

void scale(double* out, const double* in, double factor, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * factor;
}

void tally(std::uint32_t* counts, const double* v, const std::uint8_t* expected, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) counts[i] += (v[i] > 0.5 ? 1U : 0U) == expected[i] ? 1U : 0U;
}

}  // namespace

const Table& scalar() {
  static const Table table{"scalar", share_accumulate, share_finalize, sense, restore, scale, tally};
  return table;
}

}  // namespace fcdram::kernels
