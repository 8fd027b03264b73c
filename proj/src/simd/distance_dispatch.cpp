#include <atomic>
#include <cstdlib>
#include <string>

#include "pccseg/error.hpp"
#include "pccseg/simd/distance.hpp"

namespace pccseg::simd {

#if defined(PCCSEG_HAVE_X86_KERNELS)
void weighted_sq_dist_avx2(const double*, const double*, const double*, std::size_t, std::size_t, std::size_t,
                           double*);
void weighted_sq_dist_avx512(const double*, const double*, const double*, std::size_t, std::size_t, std::size_t,
                             double*);
#endif
#if defined(PCCSEG_HAVE_NEON_KERNELS)
void weighted_sq_dist_neon(const double*, const double*, const double*, std::size_t, std::size_t, std::size_t,
                           double*);
#endif

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kAvx512: return "avx512";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
#if defined(PCCSEG_HAVE_X86_KERNELS)
    case Isa::kAvx2: return __builtin_cpu_supports("avx2");
    case Isa::kAvx512: return __builtin_cpu_supports("avx512f");
#endif
#if defined(PCCSEG_HAVE_NEON_KERNELS)
    case Isa::kNeon: return true;
#endif
    default: return false;
  }
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512, Isa::kNeon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

WeightedSqDistFn kernel_for(Isa isa) {
  if (!isa_available(isa)) throw InvalidParameter("SIMD kernel not available: " + std::string(isa_name(isa)));
  switch (isa) {
#if defined(PCCSEG_HAVE_X86_KERNELS)
    case Isa::kAvx2: return &weighted_sq_dist_avx2;
    case Isa::kAvx512: return &weighted_sq_dist_avx512;
#endif
#if defined(PCCSEG_HAVE_NEON_KERNELS)
    case Isa::kNeon: return &weighted_sq_dist_neon;
#endif
    default: return &weighted_sq_dist_ref;
  }
}

Isa default_isa() {
  if (const char* env = std::getenv("PCCSEG_SIMD")) {
    for (Isa isa : available_isas()) {
      if (isa_name(isa) == env) return isa;
    }
  }
  auto isas = available_isas();
  return isas.back();
}

namespace {

struct ActiveKernel {
  std::atomic<Isa> isa;
  std::atomic<WeightedSqDistFn> fn;
  ActiveKernel() : isa(default_isa()), fn(kernel_for(isa.load())) {}
};

ActiveKernel& active() {
  static ActiveKernel k;
  return k;
}

}  // namespace

Isa active_isa() { return active().isa.load(); }

void set_active_isa(Isa isa) {
  auto fn = kernel_for(isa);
  active().isa.store(isa);
  active().fn.store(fn);
}

void weighted_sq_dist(const double* query, const double* weights, const double* columns, std::size_t stride,
                      std::size_t dims, std::size_t count, double* out) {
  active().fn.load(std::memory_order_relaxed)(query, weights, columns, stride, dims, count, out);
}

}  // namespace pccseg::simd
