#include <immintrin.h>

#include "pccseg/simd/distance.hpp"

namespace pccseg::simd {

void weighted_sq_dist_avx512(const double* query, const double* weights, const double* columns,
                             std::size_t stride, std::size_t dims, std::size_t count, double* out) {
  std::size_t j = 0;
  for (; j + 8 <= count; j += 8) {
    __m512d acc = _mm512_setzero_pd();
    for (std::size_t d = 0; d < dims; ++d) {
      const __m512d q = _mm512_set1_pd(query[d]);
      const __m512d w = _mm512_set1_pd(weights[d]);
      __m512d t = _mm512_mul_pd(w, _mm512_sub_pd(q, _mm512_loadu_pd(columns + d * stride + j)));
      acc = _mm512_add_pd(acc, _mm512_mul_pd(t, t));
    }
    _mm512_storeu_pd(out + j, acc);
  }
  if (j < count) {
    // Masked tail keeps the whole block on the vector path.
    const __mmask8 mask = static_cast<__mmask8>((1u << (count - j)) - 1u);
    __m512d acc = _mm512_setzero_pd();
    for (std::size_t d = 0; d < dims; ++d) {
      const __m512d q = _mm512_set1_pd(query[d]);
      const __m512d w = _mm512_set1_pd(weights[d]);
      const __m512d c = _mm512_maskz_loadu_pd(mask, columns + d * stride + j);
      __m512d t = _mm512_mul_pd(w, _mm512_sub_pd(q, c));
      acc = _mm512_add_pd(acc, _mm512_mul_pd(t, t));
    }
    _mm512_mask_storeu_pd(out + j, mask, acc);
  }
}

}  // namespace pccseg::simd
