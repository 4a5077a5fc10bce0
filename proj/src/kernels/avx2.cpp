#include "blocktau/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define BLOCKTAU_X86 1
#include <immintrin.h>
#endif

namespace blocktau::kernels {

#if BLOCKTAU_X86
namespace {

#define AVX2_FN __attribute__((target("avx2")))

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

AVX2_FN std::int64_t hsum_epi64(__m256i v) {
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

AVX2_FN double hsum_pd(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

AVX2_FN SignCounts sign_counts_avx2(double xi, double yi, const double* x,
                                    const double* y, std::size_t n) {
  const __m256d vxi = _mm256_set1_pd(xi);
  const __m256d vyi = _mm256_set1_pd(yi);
  const __m256d zero = _mm256_setzero_pd();
  __m256i conc = _mm256_setzero_si256();
  __m256i disc = _mm256_setzero_si256();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d dx = _mm256_sub_pd(vxi, _mm256_loadu_pd(x + k));
    const __m256d dy = _mm256_sub_pd(vyi, _mm256_loadu_pd(y + k));
    const __m256d px = _mm256_cmp_pd(dx, zero, _CMP_GT_OQ);
    const __m256d nx = _mm256_cmp_pd(dx, zero, _CMP_LT_OQ);
    const __m256d py = _mm256_cmp_pd(dy, zero, _CMP_GT_OQ);
    const __m256d ny = _mm256_cmp_pd(dy, zero, _CMP_LT_OQ);
    const __m256d c = _mm256_or_pd(_mm256_and_pd(px, py), _mm256_and_pd(nx, ny));
    const __m256d d = _mm256_or_pd(_mm256_and_pd(px, ny), _mm256_and_pd(nx, py));
    // true lanes are all ones, i.e. -1 as int64
    conc = _mm256_sub_epi64(conc, _mm256_castpd_si256(c));
    disc = _mm256_sub_epi64(disc, _mm256_castpd_si256(d));
  }
  SignCounts out{hsum_epi64(conc), hsum_epi64(disc)};
  for (; k < n; ++k) {
    const int s = sgn(xi - x[k]) * sgn(yi - y[k]);
    out.concordant += s > 0;
    out.discordant += s < 0;
  }
  return out;
}

AVX2_FN WeightedOrthants weighted_orthants_avx2(double xi, double yi,
                                                const double* x,
                                                const double* y,
                                                const double* w,
                                                std::size_t n) {
  const __m256d vxi = _mm256_set1_pd(xi);
  const __m256d vyi = _mm256_set1_pd(yi);
  const __m256d zero = _mm256_setzero_pd();
  __m256d conc = zero, disc = zero, uu = zero, ul = zero, tied = zero;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d wk = _mm256_loadu_pd(w + k);
    const __m256d dx = _mm256_sub_pd(vxi, _mm256_loadu_pd(x + k));
    const __m256d dy = _mm256_sub_pd(vyi, _mm256_loadu_pd(y + k));
    const __m256d px = _mm256_cmp_pd(dx, zero, _CMP_GT_OQ);
    const __m256d nx = _mm256_cmp_pd(dx, zero, _CMP_LT_OQ);
    const __m256d py = _mm256_cmp_pd(dy, zero, _CMP_GT_OQ);
    const __m256d ny = _mm256_cmp_pd(dy, zero, _CMP_LT_OQ);
    const __m256d both_up = _mm256_and_pd(nx, ny);
    const __m256d up_down = _mm256_and_pd(nx, py);
    const __m256d c = _mm256_or_pd(_mm256_and_pd(px, py), both_up);
    const __m256d d = _mm256_or_pd(_mm256_and_pd(px, ny), up_down);
    conc = _mm256_add_pd(conc, _mm256_and_pd(c, wk));
    disc = _mm256_add_pd(disc, _mm256_and_pd(d, wk));
    uu = _mm256_add_pd(uu, _mm256_and_pd(both_up, wk));
    ul = _mm256_add_pd(ul, _mm256_and_pd(up_down, wk));
    tied = _mm256_add_pd(tied, _mm256_andnot_pd(_mm256_or_pd(c, d), wk));
  }
  WeightedOrthants out{hsum_pd(conc), hsum_pd(disc), hsum_pd(uu), hsum_pd(ul),
                       hsum_pd(tied)};
  for (; k < n; ++k) {
    const int sx = sgn(xi - x[k]);
    const int sy = sgn(yi - y[k]);
    const int s = sx * sy;
    if (s > 0) out.concordant += w[k];
    if (s < 0) out.discordant += w[k];
    if (s == 0) out.tied += w[k];
    if (sx < 0 && sy < 0) out.upper_upper += w[k];
    if (sx < 0 && sy > 0) out.upper_lower += w[k];
  }
  return out;
}

AVX2_FN double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + k),
                                             _mm256_loadu_pd(b + k)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + k + 4),
                                             _mm256_loadu_pd(b + k + 4)));
  }
  double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

#undef AVX2_FN

const KernelTable kAvx2{"avx2", &sign_counts_avx2, &weighted_orthants_avx2,
                        &dot_avx2};

}  // namespace

const KernelTable* avx2_table() {
  return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace blocktau::kernels
