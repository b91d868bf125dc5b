#pragma once

// HTTP/JSON client for the inference sidecar.
//
//   POST /v1/embed       {"texts": [str...]}    -> {"dim": int, "vectors": [[float...]...]}
//   POST /v1/mlm_scores  {"phrases": [str...]}  -> {"results": [{"token_logprobs": [float...],
//                                                                 "token_count": int}...]}
//   GET  /v1/health                             -> {"status": str, "models": {...}, "dim": int}
//
// Tokenization and smoothing happen server-side; only scores and vectors cross the wire.

#include <chrono>
#include <optional>
#include <string>

#include "tpf/backend/backend.hpp"

namespace tpf::backend {

struct RemoteOptions {
    std::string endpoint;                      // e.g. "http://127.0.0.1:8808"
    std::size_t max_batch = 64;                // requests are split to respect the server cap
    std::chrono::milliseconds timeout{30000};
};

struct HealthInfo {
    std::string status;
    std::size_t dim = 0;
    std::string embedder_model;
    std::string scorer_model;
};

/// GET /v1/health. Throws TransportError when unreachable, ProtocolError when not 200 or malformed.
HealthInfo remote_health(const RemoteOptions& opts);

class RemoteEmbedder final : public EmbedderBackend {
public:
    /// With expected_dim unset the dimension is taken from /v1/health at construction.
    explicit RemoteEmbedder(RemoteOptions opts, std::optional<std::size_t> expected_dim = std::nullopt);

    std::string name() const override { return "remote:" + model_; }
    std::size_t dim() const override { return dim_; }

    /// Validates cardinality and dimension, rejects non-finite values, renormalizes client-side.
    std::vector<Embedding> embed(std::span<const std::string> texts) const override;

private:
    RemoteOptions opts_;
    std::size_t dim_ = 0;
    std::string model_ = "embedder";
};

class RemoteMlmScorer final : public MlmScorerBackend {
public:
    explicit RemoteMlmScorer(RemoteOptions opts) : opts_(std::move(opts)) {}

    std::string name() const override { return "remote:mlm"; }

    /// Empty input returns an empty result without a request.
    std::vector<TokenLogProbs> score_batch(std::span<const std::string> phrases) const override;

private:
    RemoteOptions opts_;
};

std::vector<Embedding> remote_embed(std::span<const std::string> texts, const RemoteOptions& opts,
                                    std::size_t expected_dim);
std::vector<TokenLogProbs> remote_mlm_scores(std::span<const std::string> phrases, const RemoteOptions& opts);

}  // namespace tpf::backend
