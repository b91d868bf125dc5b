#include "tpf/simd/kernels.hpp"

#include <cmath>

namespace tpf::simd::scalar {

using detail::kLanes;

double dot(const float* x, const float* y, std::size_t n) noexcept {
    double acc[kLanes] = {};
    for (std::size_t i = 0; i < n; ++i) {
        double& lane = acc[i % kLanes];
        lane = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), lane);
    }
    return detail::reduce_lanes(acc);
}

double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept {
    double acc[kLanes] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(x[i]) * sx;
        const double d = std::fma(-static_cast<double>(y[i]), sy, a);
        double& lane = acc[i % kLanes];
        lane = std::fma(d, d, lane);
    }
    return detail::reduce_lanes(acc);
}

}  // namespace tpf::simd::scalar
