#include "tpf/simd/kernels.hpp"

#include <cmath>

#if defined(__aarch64__) || defined(_M_ARM64)
#define TPF_HAVE_NEON_KERNELS 1
#include <arm_neon.h>
#else
#define TPF_HAVE_NEON_KERNELS 0
#endif

namespace tpf::simd::neon {

#if TPF_HAVE_NEON_KERNELS

using detail::kLanes;

namespace {

// Eight floats widened into four double pairs: lanes (0,1) (2,3) (4,5) (6,7).
inline void load8(const float* p, float64x2_t (&out)[4]) noexcept {
    const float32x4_t a = vld1q_f32(p);
    const float32x4_t b = vld1q_f32(p + 4);
    out[0] = vcvt_f64_f32(vget_low_f32(a));
    out[1] = vcvt_high_f64_f32(a);
    out[2] = vcvt_f64_f32(vget_low_f32(b));
    out[3] = vcvt_high_f64_f32(b);
}

inline void spill(const float64x2_t (&acc)[4], double (&out)[kLanes]) noexcept {
    for (int k = 0; k < 4; ++k) vst1q_f64(out + 2 * k, acc[k]);
}

}  // namespace

bool compiled() noexcept { return true; }

double dot(const float* x, const float* y, std::size_t n) noexcept {
    float64x2_t acc[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        float64x2_t xv[4], yv[4];
        load8(x + i, xv);
        load8(y + i, yv);
        for (int k = 0; k < 4; ++k) acc[k] = vfmaq_f64(acc[k], xv[k], yv[k]);
    }
    double lanes[kLanes];
    spill(acc, lanes);
    for (std::size_t j = 0; i < n; ++i, ++j) {
        lanes[j] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), lanes[j]);
    }
    return detail::reduce_lanes(lanes);
}

double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept {
    const float64x2_t vsx = vdupq_n_f64(sx);
    const float64x2_t vsy = vdupq_n_f64(sy);
    float64x2_t acc[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        float64x2_t xv[4], yv[4];
        load8(x + i, xv);
        load8(y + i, yv);
        for (int k = 0; k < 4; ++k) {
            // vfmsq computes a - b*c in one rounding, matching fma(-y, sy, x*sx).
            const float64x2_t d = vfmsq_f64(vmulq_f64(xv[k], vsx), yv[k], vsy);
            acc[k] = vfmaq_f64(acc[k], d, d);
        }
    }
    double lanes[kLanes];
    spill(acc, lanes);
    for (std::size_t j = 0; i < n; ++i, ++j) {
        const double a = static_cast<double>(x[i]) * sx;
        const double d = std::fma(-static_cast<double>(y[i]), sy, a);
        lanes[j] = std::fma(d, d, lanes[j]);
    }
    return detail::reduce_lanes(lanes);
}

#else

bool compiled() noexcept { return false; }
double dot(const float* x, const float* y, std::size_t n) noexcept { return scalar::dot(x, y, n); }
double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept {
    return scalar::squared_l2_scaled(x, sx, y, sy, n);
}

#endif

}  // namespace tpf::simd::neon
