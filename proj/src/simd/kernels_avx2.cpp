// AVX2+FMA variants of the inner-loop kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; it must not be entered unless the CPU
// reports both features (the dispatcher checks).

#include "gpocc/simd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

namespace gpocc::simd {
namespace {

// exp(x) for x <= 0, 4 lanes, Cephes-style rational approximation with
// two-step 2^n reconstruction so results stay accurate into the denormal
// range. Max observed error vs std::exp is ~2 ulp.
inline __m256d exp_nonpos_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-745.5), _CMP_LT_OQ);
    x = _mm256_max_pd(x, _mm256_set1_pd(-745.5));

    // n = floor(x*log2(e) + 0.5); reduce x by n*ln(2) in two pieces.
    const __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
    x = _mm256_fnmadd_pd(n, c1, x);
    x = _mm256_fnmadd_pd(n, c2, x);

    const __m256d xx = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(p0, xx, p1);
    px = _mm256_fmadd_pd(px, xx, p2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
    qx = _mm256_fmadd_pd(qx, xx, q2);
    qx = _mm256_fmadd_pd(qx, xx, q3);
    const __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    __m256d r = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    // r * 2^n via exponent bits, split n = n1 + n2 to reach denormals.
    const __m128i ni = _mm256_cvtpd_epi32(n);
    const __m128i n1 = _mm_srai_epi32(ni, 1);
    const __m128i n2 = _mm_sub_epi32(ni, n1);
    const __m128i bias = _mm_set1_epi32(1023);
    const __m256i e1 = _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm_add_epi32(n1, bias)), 52);
    const __m256i e2 = _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm_add_epi32(n2, bias)), 52);
    r = _mm256_mul_pd(r, _mm256_castsi256_pd(e1));
    r = _mm256_mul_pd(r, _mm256_castsi256_pd(e2));

    return _mm256_andnot_pd(underflow, r);
}

inline __m256d neg_scaled_dist(const double* xs, const double* ys, std::size_t i,
                               __m256d qx, __m256d qy, __m256d neg_inv_l) {
    const __m256d dx = _mm256_sub_pd(qx, _mm256_loadu_pd(xs + i));
    const __m256d dy = _mm256_sub_pd(qy, _mm256_loadu_pd(ys + i));
    const __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    return _mm256_mul_pd(_mm256_sqrt_pd(d2), neg_inv_l);
}

void kernel_row_avx2(const double* xs, const double* ys, std::size_t n,
                     double qx, double qy, double inv_l, double* out) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    const __m256d vnl = _mm256_set1_pd(-inv_l);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, exp_nonpos_pd(neg_scaled_dist(xs, ys, i, vqx, vqy, vnl)));
    }
    for (; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        out[i] = std::exp(-std::sqrt(dx * dx + dy * dy) * inv_l);
    }
}

double max_scaled_kernel_avx2(const double* xs, const double* ys,
                              const double* scale, std::size_t n,
                              double qx, double qy, double inv_l) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    const __m256d vnl = _mm256_set1_pd(-inv_l);
    __m256d vbest = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d k = exp_nonpos_pd(neg_scaled_dist(xs, ys, i, vqx, vqy, vnl));
        vbest = _mm256_max_pd(vbest, _mm256_mul_pd(k, _mm256_loadu_pd(scale + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vbest);
    double best = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        const double v = scale[i] * std::exp(-std::sqrt(dx * dx + dy * dy) * inv_l);
        if (v > best) best = v;
    }
    return best;
}

std::size_t argmin_sqdist_avx2(const double* xs, const double* ys, std::size_t n,
                               double qx, double qy, double* best) {
    const __m256d vqx = _mm256_set1_pd(qx);
    const __m256d vqy = _mm256_set1_pd(qy);
    __m256d vbd = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d vbi = _mm256_setzero_pd();
    __m256d vidx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d vfour = _mm256_set1_pd(4.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(vqx, _mm256_loadu_pd(xs + i));
        const __m256d dy = _mm256_sub_pd(vqy, _mm256_loadu_pd(ys + i));
        const __m256d d = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
        const __m256d lt = _mm256_cmp_pd(d, vbd, _CMP_LT_OQ);
        vbd = _mm256_blendv_pd(vbd, d, lt);
        vbi = _mm256_blendv_pd(vbi, vidx, lt);
        vidx = _mm256_add_pd(vidx, vfour);
    }
    alignas(32) double ld[4];
    alignas(32) double li[4];
    _mm256_store_pd(ld, vbd);
    _mm256_store_pd(li, vbi);
    double bd = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (int lane = 0; lane < 4; ++lane) {
        const auto idx = static_cast<std::size_t>(li[lane]);
        if (ld[lane] < bd || (ld[lane] == bd && idx < bi)) {
            bd = ld[lane];
            bi = idx;
        }
    }
    for (; i < n; ++i) {
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

const Kernels* avx2_kernels() {
    static const Kernels k{"avx2", &kernel_row_avx2, &max_scaled_kernel_avx2,
                           &argmin_sqdist_avx2};
    return &k;
}

}  // namespace gpocc::simd

#else

namespace gpocc::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace gpocc::simd

#endif
