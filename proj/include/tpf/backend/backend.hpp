#pragma once

// The two model capabilities the pipeline depends on: masked-token scoring and sentence
// embedding. Implementations must be safe to call concurrently on a const instance.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tpf::backend {

/// Smoothing added to a probability before taking its log.
inline constexpr double kLogSmoothing = 1e-10;

/// Fixed-dimension real vector. Backends return unit-norm vectors.
class Embedding {
public:
    Embedding() = default;
    explicit Embedding(std::vector<float> components) : v_(std::move(components)) {}

    /// L2-normalizes a double accumulator into float storage. Throws EmptyText on a zero vector.
    static Embedding normalized(std::span<const double> acc);

    std::span<const float> values() const noexcept { return v_; }
    std::size_t dim() const noexcept { return v_.size(); }
    double norm() const noexcept;
    bool empty() const noexcept { return v_.empty(); }

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<float> v_;
};

/// dot(a, b) / (|a| |b|), computed with the dispatched SIMD kernels in double.
double cosine(const Embedding& a, const Embedding& b) noexcept;

struct TokenLogProbs {
    std::vector<double> logprobs;
    std::size_t token_count() const noexcept { return logprobs.size(); }
};

class MlmScorerBackend {
public:
    virtual ~MlmScorerBackend() = default;
    virtual std::string name() const = 0;

    /// Per-token log(p + 1e-10), one entry per phrase, in request order.
    virtual std::vector<TokenLogProbs> score_batch(std::span<const std::string> phrases) const = 0;

    TokenLogProbs score_tokens(const std::string& phrase) const;
};

class EmbedderBackend {
public:
    virtual ~EmbedderBackend() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;

    /// One unit vector per text, in request order.
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) const = 0;

    Embedding embed_one(std::string_view text) const;
};

}  // namespace tpf::backend
