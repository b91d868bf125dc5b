#include "tpf/simd/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

namespace tpf::simd {

namespace {

using DotFn = double (*)(const float*, const float*, std::size_t) noexcept;
using L2Fn = double (*)(const float*, double, const float*, double, std::size_t) noexcept;

struct KernelTable {
    Isa isa;
    DotFn dot;
    L2Fn l2;
};

constexpr KernelTable kScalar{Isa::Scalar, &scalar::dot, &scalar::squared_l2_scaled};
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::dot, &avx2::squared_l2_scaled};
constexpr KernelTable kNeon{Isa::Neon, &neon::dot, &neon::squared_l2_scaled};

bool available(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return avx2::compiled() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
            return neon::compiled();
    }
    return false;
}

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::Avx2: return &kAvx2;
        case Isa::Neon: return &kNeon;
        case Isa::Scalar: break;
    }
    return &kScalar;
}

const KernelTable* initial_table() noexcept {
    Isa isa = detected_isa();
    if (const char* env = std::getenv("TPF_SIMD")) {
        const std::string v(env);
        if (v == "scalar") isa = Isa::Scalar;
        else if (v == "avx2" && available(Isa::Avx2)) isa = Isa::Avx2;
        else if (v == "neon" && available(Isa::Neon)) isa = Isa::Neon;
    }
    return table_for(isa);
}

std::atomic<const KernelTable*>& active() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

inline const KernelTable& kernels() noexcept { return *active().load(std::memory_order_relaxed); }

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

Isa detected_isa() noexcept {
    if (available(Isa::Avx2)) return Isa::Avx2;
    if (available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

Isa active_isa() noexcept { return kernels().isa; }

bool set_active_isa(Isa isa) noexcept {
    if (!available(isa)) return false;
    active().store(table_for(isa), std::memory_order_relaxed);
    return true;
}

double dot(std::span<const float> x, std::span<const float> y) noexcept {
    assert(x.size() == y.size());
    return kernels().dot(x.data(), y.data(), x.size());
}

double squared_l2_scaled(std::span<const float> x, double sx, std::span<const float> y, double sy) noexcept {
    assert(x.size() == y.size());
    return kernels().l2(x.data(), sx, y.data(), sy, x.size());
}

void dot_rows(std::span<const float> rows, std::size_t dim, std::span<const float> query,
              std::span<double> out) noexcept {
    assert(query.size() == dim);
    assert(rows.size() == dim * out.size());
    const DotFn fn = kernels().dot;
    const float* row = rows.data();
    for (double& o : out) {
        o = fn(row, query.data(), dim);
        row += dim;
    }
}

}  // namespace tpf::simd
