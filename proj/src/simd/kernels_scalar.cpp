#include "gpocc/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace gpocc::simd {
namespace {

void kernel_row_scalar(const double* xs, const double* ys, std::size_t n,
                       double qx, double qy, double inv_l, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        out[i] = std::exp(-std::sqrt(dx * dx + dy * dy) * inv_l);
    }
}

double max_scaled_kernel_scalar(const double* xs, const double* ys,
                                const double* scale, std::size_t n,
                                double qx, double qy, double inv_l) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        const double v = scale[i] * std::exp(-std::sqrt(dx * dx + dy * dy) * inv_l);
        if (v > best) best = v;
    }
    return best;
}

std::size_t argmin_sqdist_scalar(const double* xs, const double* ys, std::size_t n,
                                 double qx, double qy, double* best) {
    double bd = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        const double d = dx * dx + dy * dy;
        if (d < bd) {
            bd = d;
            bi = i;
        }
    }
    *best = bd;
    return bi;
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{"scalar", &kernel_row_scalar, &max_scaled_kernel_scalar,
                           &argmin_sqdist_scalar};
    return k;
}

}  // namespace gpocc::simd
