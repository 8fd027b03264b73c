#include "pccseg/simd/distance.hpp"

namespace pccseg::simd {

void weighted_sq_dist_ref(const double* query, const double* weights, const double* columns,
                          std::size_t stride, std::size_t dims, std::size_t count, double* out) {
  for (std::size_t j = 0; j < count; ++j) out[j] = 0.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const double q = query[d];
    const double w = weights[d];
    const double* col = columns + d * stride;
    for (std::size_t j = 0; j < count; ++j) {
      const double t = w * (q - col[j]);
      out[j] = out[j] + t * t;
    }
  }
}

}  // namespace pccseg::simd
