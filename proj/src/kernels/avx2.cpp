#include <immintrin.h>

#include <cstring>

#include "fcdram/kernels.hpp"

namespace fcdram::kernels {

namespace {

void share_accumulate(double* acc_wv, double* acc_w, const double* v, const double* w, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wi = _mm256_loadu_pd(w + i);
    const __m256d prod = _mm256_mul_pd(wi, _mm256_loadu_pd(v + i));
    _mm256_storeu_pd(acc_wv + i, _mm256_add_pd(_mm256_loadu_pd(acc_wv + i), prod));
    _mm256_storeu_pd(acc_w + i, _mm256_add_pd(_mm256_loadu_pd(acc_w + i), wi));
  }
  for (; i < n; ++i) {
    acc_wv[i] += w[i] * v[i];
    acc_w[i] += w[i];
  }
}

void share_finalize(double* out, const double* acc_wv, const double* acc_w, double prior, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pv = _mm256_set1_pd(prior);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_loadu_pd(acc_w + i);
    const __m256d mask = _mm256_cmp_pd(w, zero, _CMP_GT_OQ);
    // Lanes with zero weight divide 0/0; the blend discards them.
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(acc_wv + i), _mm256_blendv_pd(_mm256_set1_pd(1.0), w, mask));
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(pv, q, mask));
  }
  for (; i < n; ++i) out[i] = acc_w[i] > 0.0 ? acc_wv[i] / acc_w[i] : prior;
}

void sense(double* latch, const double* top, const double* bot, const double* offset, const double* noise,
           double kappa, double* scratch, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gt = _mm256_cmp_pd(_mm256_loadu_pd(top + i), _mm256_loadu_pd(bot + i), _CMP_GT_OQ);
    _mm256_storeu_pd(scratch + i, _mm256_and_pd(gt, one));
  }
  for (; i < n; ++i) scratch[i] = top[i] > bot[i] ? 1.0 : 0.0;

  auto scalar_at = [&](std::size_t k) {
    const double l = k > 0 ? scratch[k - 1] : 0.5;
    const double r = k + 1 < n ? scratch[k + 1] : 0.5;
    const double c = kappa * ((l + r) - 1.0);
    const double x = (((top[k] - bot[k]) + offset[k]) + noise[k]) + c;
    latch[k] = x > 0.0 ? 1.0 : 0.0;
  };
  if (n == 0) return;
  scalar_at(0);
  const __m256d kv = _mm256_set1_pd(kappa);
  i = 1;
  for (; i + 5 <= n; i += 4) {
    const __m256d l = _mm256_loadu_pd(scratch + i - 1);
    const __m256d r = _mm256_loadu_pd(scratch + i + 1);
    const __m256d c = _mm256_mul_pd(kv, _mm256_sub_pd(_mm256_add_pd(l, r), one));
    __m256d x = _mm256_sub_pd(_mm256_loadu_pd(top + i), _mm256_loadu_pd(bot + i));
    x = _mm256_add_pd(x, _mm256_loadu_pd(offset + i));
    x = _mm256_add_pd(x, _mm256_loadu_pd(noise + i));
    x = _mm256_add_pd(x, c);
    _mm256_storeu_pd(latch + i, _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_GT_OQ), one));
  }
  for (; i < n; ++i) scalar_at(i);
}

void restore(double* out, const double* v0, const double* target, double fraction, const std::uint8_t* fail,
             std::size_t n) {
  const __m256d f = _mm256_set1_pd(fraction);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(v0 + i);
    __m256d moved = _mm256_add_pd(a, _mm256_mul_pd(f, _mm256_sub_pd(_mm256_loadu_pd(target + i), a)));
    if (fail != nullptr) {
      int packed;
      std::memcpy(&packed, fail + i, sizeof(packed));
      const __m128i bytes = _mm_cvtsi32_si128(packed);
      const __m256i wide = _mm256_cvtepu8_epi64(bytes);
      const __m256d keep = _mm256_castsi256_pd(_mm256_cmpgt_epi64(wide, _mm256_setzero_si256()));
      moved = _mm256_blendv_pd(moved, a, keep);
    }
    _mm256_storeu_pd(out + i, moved);
  }
  for (; i < n; ++i) {
    const double moved = v0[i] + fraction * (target[i] - v0[i]);
    out[i] = (fail != nullptr && fail[i]) ? v0[i] : moved;
  }
}

void scale(double* out, const double* in, double factor, std::size_t n) {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(in + i), f));
  for (; i < n; ++i) out[i] = in[i] * factor;
}

void tally(std::uint32_t* counts, const double* v, const std::uint8_t* expected, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int bits = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + i), half, _CMP_GT_OQ));
    for (int k = 0; k < 4; ++k) counts[i + k] += static_cast<std::uint32_t>(((bits >> k) & 1) == expected[i + k]);
  }
  for (; i < n; ++i) counts[i] += (v[i] > 0.5 ? 1U : 0U) == expected[i] ? 1U : 0U;
}

}  // namespace

const Table& avx2_table() {
  static const Table table{"avx2", share_accumulate, share_finalize, sense, restore, scale, tally};
  return table;
}

}  // namespace fcdram::kernels
