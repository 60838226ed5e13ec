#include "gpocc/simd/kernels.hpp"

#include <atomic>

namespace gpocc::simd {
namespace {

const Kernels* detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        if (const Kernels* k = avx2_kernels()) return k;
    }
#endif
    return &scalar_kernels();
}

std::atomic<const Kernels*>& slot() {
    static std::atomic<const Kernels*> s{detect()};
    return s;
}

}  // namespace

const Kernels& active() { return *slot().load(std::memory_order_relaxed); }

void select(const Kernels& k) { slot().store(&k, std::memory_order_relaxed); }

}  // namespace gpocc::simd
