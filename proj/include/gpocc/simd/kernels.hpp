#pragma once

#include <cstddef>

namespace gpocc::simd {

/// The arithmetic inner loops everything hot goes through: Matern-1/2 kernel
/// rows, the prior max-reduction, and nearest-point scans. Each function has
/// a scalar reference implementation; on x86 with AVX2+FMA a vectorized
/// variant is selected once at startup. Variants are interchangeable up to
/// floating-point noise and are equivalence-tested against each other.
struct Kernels {
    const char* name;

    /// out[i] = exp(-|q - p_i| / l), with inv_l = 1/l.
    void (*kernel_row)(const double* xs, const double* ys, std::size_t n,
                       double qx, double qy, double inv_l, double* out);

    /// max_i scale[i] * exp(-|q - p_i| / l). Returns -inf for n == 0.
    double (*max_scaled_kernel)(const double* xs, const double* ys,
                                const double* scale, std::size_t n,
                                double qx, double qy, double inv_l);

    /// Index of the smallest squared distance (first index on exact ties).
    /// n must be > 0. Writes the winning squared distance to *best.
    std::size_t (*argmin_sqdist)(const double* xs, const double* ys, std::size_t n,
                                 double qx, double qy, double* best);
};

const Kernels& scalar_kernels();

/// AVX2+FMA variant, or nullptr when this build/CPU cannot run it.
const Kernels* avx2_kernels();

/// The runtime-selected variant (AVX2 when available, else scalar).
const Kernels& active();

/// Override the active variant (tests, --no-simd).
void select(const Kernels& k);

}  // namespace gpocc::simd
