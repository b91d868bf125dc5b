#include "tpf/simd/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#define TPF_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#else
#define TPF_HAVE_AVX2_KERNELS 0
#endif

namespace tpf::simd::avx2 {

#if TPF_HAVE_AVX2_KERNELS

using detail::kLanes;

#define TPF_AVX2_TARGET __attribute__((target("avx2,fma")))

namespace {

// Widen eight floats into two double registers: lanes 0..3 and 4..7.
TPF_AVX2_TARGET inline void load8(const float* p, __m256d& lo, __m256d& hi) noexcept {
    const __m256 v = _mm256_loadu_ps(p);
    lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
    hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
}

TPF_AVX2_TARGET inline void spill(__m256d lo, __m256d hi, double (&acc)[kLanes]) noexcept {
    _mm256_storeu_pd(acc, lo);
    _mm256_storeu_pd(acc + 4, hi);
}

}  // namespace

bool compiled() noexcept { return true; }

TPF_AVX2_TARGET double dot(const float* x, const float* y, std::size_t n) noexcept {
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        __m256d xl, xh, yl, yh;
        load8(x + i, xl, xh);
        load8(y + i, yl, yh);
        acc_lo = _mm256_fmadd_pd(xl, yl, acc_lo);
        acc_hi = _mm256_fmadd_pd(xh, yh, acc_hi);
    }
    double acc[kLanes];
    spill(acc_lo, acc_hi, acc);
    for (std::size_t j = 0; i < n; ++i, ++j) {
        acc[j] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), acc[j]);
    }
    return detail::reduce_lanes(acc);
}

TPF_AVX2_TARGET double squared_l2_scaled(const float* x, double sx, const float* y, double sy,
                                         std::size_t n) noexcept {
    const __m256d vsx = _mm256_set1_pd(sx);
    const __m256d vsy = _mm256_set1_pd(sy);
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        __m256d xl, xh, yl, yh;
        load8(x + i, xl, xh);
        load8(y + i, yl, yh);
        // d = x*sx - y*sy, with the second product fused into the subtraction.
        const __m256d dl = _mm256_fnmadd_pd(yl, vsy, _mm256_mul_pd(xl, vsx));
        const __m256d dh = _mm256_fnmadd_pd(yh, vsy, _mm256_mul_pd(xh, vsx));
        acc_lo = _mm256_fmadd_pd(dl, dl, acc_lo);
        acc_hi = _mm256_fmadd_pd(dh, dh, acc_hi);
    }
    double acc[kLanes];
    spill(acc_lo, acc_hi, acc);
    for (std::size_t j = 0; i < n; ++i, ++j) {
        const double a = static_cast<double>(x[i]) * sx;
        const double d = std::fma(-static_cast<double>(y[i]), sy, a);
        acc[j] = std::fma(d, d, acc[j]);
    }
    return detail::reduce_lanes(acc);
}

#else

bool compiled() noexcept { return false; }
double dot(const float* x, const float* y, std::size_t n) noexcept { return scalar::dot(x, y, n); }
double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept {
    return scalar::squared_l2_scaled(x, sx, y, sy, n);
}

#endif

}  // namespace tpf::simd::avx2
