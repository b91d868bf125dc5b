#pragma once

// Dense float kernels used by the flat index, the alignment stage and the n-gram scanner.
//
// Every kernel accumulates in double over eight interleaved lanes (lane j owns elements
// i with i % 8 == j) using fused multiply-add, then reduces the lanes in a fixed tree.
// The scalar reference follows the same schedule with std::fma, so the AVX2 and NEON
// variants are bit-identical to it, not merely close. Tests rely on that.

#include <cstddef>
#include <span>
#include <string_view>

namespace tpf::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

/// Best instruction set supported by the running CPU and compiled into this binary.
Isa detected_isa() noexcept;

/// Instruction set currently used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Force a specific variant (tests, benchmarks). Returns false and leaves the selection
/// unchanged if `isa` is not available on this machine. The environment variable
/// TPF_SIMD=scalar|avx2|neon applies the same override at first use.
bool set_active_isa(Isa isa) noexcept;

/// Sum of x[i] * y[i].
double dot(std::span<const float> x, std::span<const float> y) noexcept;

/// Sum of (x[i] * sx - y[i] * sy)^2. With sx, sy the inverse norms this is the squared
/// Euclidean distance between the normalized vectors.
double squared_l2_scaled(std::span<const float> x, double sx,
                         std::span<const float> y, double sy) noexcept;

/// out[r] = dot(rows[r*dim .. r*dim+dim), query) for every row of a row-major matrix.
void dot_rows(std::span<const float> rows, std::size_t dim, std::span<const float> query,
              std::span<double> out) noexcept;

/// Sum of x[i]^2.
inline double squared_norm(std::span<const float> x) noexcept { return dot(x, x); }

// Explicit variants, exposed for equivalence testing. The non-scalar ones must only be
// called when the corresponding Isa is reported available by detected_isa().
namespace scalar {
double dot(const float* x, const float* y, std::size_t n) noexcept;
double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
double dot(const float* x, const float* y, std::size_t n) noexcept;
double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept;
}  // namespace avx2

namespace neon {
bool compiled() noexcept;
double dot(const float* x, const float* y, std::size_t n) noexcept;
double squared_l2_scaled(const float* x, double sx, const float* y, double sy, std::size_t n) noexcept;
}  // namespace neon

namespace detail {
inline constexpr std::size_t kLanes = 8;

/// Fixed reduction tree shared by all variants.
inline double reduce_lanes(const double (&acc)[kLanes]) noexcept {
    const double a = (acc[0] + acc[4]) + (acc[2] + acc[6]);
    const double b = (acc[1] + acc[5]) + (acc[3] + acc[7]);
    return a + b;
}
}  // namespace detail

}  // namespace tpf::simd
