#include <immintrin.h>

#include "pccseg/simd/distance.hpp"

namespace pccseg::simd {

// 4 rows per lane group; dimension loop innermost so each lane sees the reference order.
void weighted_sq_dist_avx2(const double* query, const double* weights, const double* columns,
                           std::size_t stride, std::size_t dims, std::size_t count, double* out) {
  std::size_t j = 0;
  for (; j + 8 <= count; j += 8) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dims; ++d) {
      const __m256d q = _mm256_set1_pd(query[d]);
      const __m256d w = _mm256_set1_pd(weights[d]);
      const double* col = columns + d * stride + j;
      __m256d t0 = _mm256_mul_pd(w, _mm256_sub_pd(q, _mm256_loadu_pd(col)));
      __m256d t1 = _mm256_mul_pd(w, _mm256_sub_pd(q, _mm256_loadu_pd(col + 4)));
      acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(t0, t0));
      acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(t1, t1));
    }
    _mm256_storeu_pd(out + j, acc0);
    _mm256_storeu_pd(out + j + 4, acc1);
  }
  for (; j + 4 <= count; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dims; ++d) {
      const __m256d q = _mm256_set1_pd(query[d]);
      const __m256d w = _mm256_set1_pd(weights[d]);
      __m256d t = _mm256_mul_pd(w, _mm256_sub_pd(q, _mm256_loadu_pd(columns + d * stride + j)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    _mm256_storeu_pd(out + j, acc);
  }
  if (j < count) weighted_sq_dist_ref(query, weights, columns + j, stride, dims, count - j, out + j);
}

}  // namespace pccseg::simd
