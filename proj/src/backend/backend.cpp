#include "tpf/backend/backend.hpp"

#include <cmath>

#include "tpf/error.hpp"
#include "tpf/simd/kernels.hpp"

namespace tpf::backend {

Embedding Embedding::normalized(std::span<const double> acc) {
    double sq = 0.0;
    for (double v : acc) sq += v * v;
    if (!(sq > 0.0) || !std::isfinite(sq)) {
        throw Error(ErrorKind::EmptyText, "cannot normalize a zero or non-finite vector");
    }
    const double inv = 1.0 / std::sqrt(sq);
    std::vector<float> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] * inv);
    return Embedding(std::move(out));
}

double Embedding::norm() const noexcept { return std::sqrt(simd::squared_norm(v_)); }

double cosine(const Embedding& a, const Embedding& b) noexcept {
    const double na = simd::squared_norm(a.values());
    const double nb = simd::squared_norm(b.values());
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return simd::dot(a.values(), b.values()) / (std::sqrt(na) * std::sqrt(nb));
}

TokenLogProbs MlmScorerBackend::score_tokens(const std::string& phrase) const {
    auto out = score_batch(std::span<const std::string>(&phrase, 1));
    if (out.size() != 1) throw Error(ErrorKind::Backend, name() + ": scorer returned wrong cardinality");
    return std::move(out.front());
}

Embedding EmbedderBackend::embed_one(std::string_view text) const {
    const std::string s(text);
    auto out = embed(std::span<const std::string>(&s, 1));
    if (out.size() != 1) throw Error(ErrorKind::Backend, name() + ": embedder returned wrong cardinality");
    return std::move(out.front());
}

}  // namespace tpf::backend
