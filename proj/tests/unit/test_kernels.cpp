#include "tpf/simd/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace tpf::simd;

namespace {

std::vector<float> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> v(n);
    for (float& x : v) x = dist(rng);
    return v;
}

// Plain sequential double sum; agrees with the lane schedule only to rounding.
double naive_dot(const std::vector<float>& x, const std::vector<float>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(x[i]) * y[i];
    return s;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<Isa> vector_isas() {
    std::vector<Isa> out;
    if (avx2::compiled() && detected_isa() == Isa::Avx2) out.push_back(Isa::Avx2);
    if (neon::compiled() && detected_isa() == Isa::Neon) out.push_back(Isa::Neon);
    return out;
}

double variant_dot(Isa isa, const float* x, const float* y, std::size_t n) {
    switch (isa) {
        case Isa::Avx2: return avx2::dot(x, y, n);
        case Isa::Neon: return neon::dot(x, y, n);
        case Isa::Scalar: break;
    }
    return scalar::dot(x, y, n);
}

double variant_l2(Isa isa, const float* x, double sx, const float* y, double sy, std::size_t n) {
    switch (isa) {
        case Isa::Avx2: return avx2::squared_l2_scaled(x, sx, y, sy, n);
        case Isa::Neon: return neon::squared_l2_scaled(x, sx, y, sy, n);
        case Isa::Scalar: break;
    }
    return scalar::squared_l2_scaled(x, sx, y, sy, n);
}

}  // namespace

TEST(Kernels, ScalarMatchesNaiveSum) {
    std::mt19937_64 rng(1);
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 64u, 384u, 1001u}) {
        auto x = random_vector(n, rng);
        auto y = random_vector(n, rng);
        EXPECT_NEAR(scalar::dot(x.data(), y.data(), n), naive_dot(x, y), 1e-9 * (1.0 + n));
    }
}

TEST(Kernels, ScalarL2MatchesDefinition) {
    std::mt19937_64 rng(2);
    for (std::size_t n : {3u, 16u, 65u}) {
        auto x = random_vector(n, rng);
        auto y = random_vector(n, rng);
        const double sx = 0.5, sy = 2.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] * sx - y[i] * sy;
            ref += d * d;
        }
        EXPECT_NEAR(scalar::squared_l2_scaled(x.data(), sx, y.data(), sy, n), ref, 1e-9 * ref);
    }
}

// Every vector variant must reproduce the scalar reference bit for bit, for all tail lengths.
TEST(Kernels, VectorVariantsAreBitIdenticalToScalar) {
    const auto isas = vector_isas();
    if (isas.empty()) GTEST_SKIP() << "no vector ISA available on this machine";
    std::mt19937_64 rng(3);
    for (Isa isa : isas) {
        for (std::size_t n = 0; n <= 80; ++n) {
            auto x = random_vector(n, rng);
            auto y = random_vector(n, rng);
            const double s = scalar::dot(x.data(), y.data(), n);
            const double v = variant_dot(isa, x.data(), y.data(), n);
            EXPECT_TRUE(bit_equal(s, v)) << to_string(isa) << " dot n=" << n << " " << s << " vs " << v;

            const double ls = scalar::squared_l2_scaled(x.data(), 0.37, y.data(), 1.91, n);
            const double lv = variant_l2(isa, x.data(), 0.37, y.data(), 1.91, n);
            EXPECT_TRUE(bit_equal(ls, lv)) << to_string(isa) << " l2 n=" << n;
        }
    }
}

TEST(Kernels, DispatchOverrideRoundTrips) {
    const Isa before = active_isa();
    ASSERT_TRUE(set_active_isa(Isa::Scalar));
    EXPECT_EQ(active_isa(), Isa::Scalar);

    std::mt19937_64 rng(4);
    auto x = random_vector(100, rng);
    auto y = random_vector(100, rng);
    const double scalar_value = dot(x, y);
    ASSERT_TRUE(set_active_isa(detected_isa()));
    EXPECT_TRUE(bit_equal(dot(x, y), scalar_value));

    if (detected_isa() != Isa::Neon) {
        EXPECT_FALSE(set_active_isa(Isa::Neon));
    }
    set_active_isa(before);
}

TEST(Kernels, DotRowsMatchesPerRowDot) {
    std::mt19937_64 rng(5);
    const std::size_t dim = 37, rows = 11;
    auto m = random_vector(dim * rows, rng);
    auto q = random_vector(dim, rng);
    std::vector<double> out(rows);
    dot_rows(m, dim, q, out);
    for (std::size_t r = 0; r < rows; ++r) {
        const double expect = dot(std::span<const float>(m).subspan(r * dim, dim), q);
        EXPECT_TRUE(bit_equal(out[r], expect));
    }
}
