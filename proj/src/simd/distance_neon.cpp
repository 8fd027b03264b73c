#include <arm_neon.h>

#include "pccseg/simd/distance.hpp"

namespace pccseg::simd {

void weighted_sq_dist_neon(const double* query, const double* weights, const double* columns,
                           std::size_t stride, std::size_t dims, std::size_t count, double* out) {
  std::size_t j = 0;
  for (; j + 2 <= count; j += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t d = 0; d < dims; ++d) {
      const float64x2_t q = vdupq_n_f64(query[d]);
      const float64x2_t w = vdupq_n_f64(weights[d]);
      float64x2_t t = vmulq_f64(w, vsubq_f64(q, vld1q_f64(columns + d * stride + j)));
      // vmulq + vaddq, not vfmaq: fused rounding would diverge from the reference.
      acc = vaddq_f64(acc, vmulq_f64(t, t));
    }
    vst1q_f64(out + j, acc);
  }
  if (j < count) weighted_sq_dist_ref(query, weights, columns + j, stride, dims, count - j, out + j);
}

}  // namespace pccseg::simd
