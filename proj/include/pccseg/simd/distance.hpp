#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace pccseg::simd {

enum class Isa { kScalar, kAvx2, kAvx512, kNeon };

/// Weighted squared distances from one query to a column-major block of rows:
///
///   out[j] = sum_d (weights[d] * (query[d] - columns[d * stride + j]))^2,  j in [0, count)
///
/// Every variant accumulates dimension by dimension in the same order with separate
/// multiply and add, so all variants are bit-identical to the scalar reference.
using WeightedSqDistFn = void (*)(const double* query, const double* weights, const double* columns,
                                  std::size_t stride, std::size_t dims, std::size_t count, double* out);

void weighted_sq_dist_ref(const double* query, const double* weights, const double* columns,
                          std::size_t stride, std::size_t dims, std::size_t count, double* out);

std::string_view isa_name(Isa isa);

/// True when the kernel was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Every available ISA, scalar first.
std::vector<Isa> available_isas();

/// Widest available ISA; honours PCCSEG_SIMD=scalar|avx2|avx512|neon when set to an available one.
Isa default_isa();

Isa active_isa();
/// Throws InvalidParameter if the ISA is not available.
void set_active_isa(Isa isa);

WeightedSqDistFn kernel_for(Isa isa);

/// Dispatches to the active kernel.
void weighted_sq_dist(const double* query, const double* weights, const double* columns,
                      std::size_t stride, std::size_t dims, std::size_t count, double* out);

}  // namespace pccseg::simd
