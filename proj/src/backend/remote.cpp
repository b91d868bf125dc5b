#include "tpf/backend/remote.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "tpf/error.hpp"

namespace tpf::backend {

namespace {

using nlohmann::json;

// log(1 + 1e-10): the largest value a smoothed log-probability can take.
const double kMaxLogProb = std::log1p(kLogSmoothing);

httplib::Client make_client(const RemoteOptions& opts) {
    if (opts.endpoint.empty()) throw Error(ErrorKind::InvalidArgument, "remote backend needs an endpoint");
    httplib::Client cli(opts.endpoint);
    if (!cli.is_valid()) throw Error(ErrorKind::InvalidArgument, "invalid endpoint: " + opts.endpoint);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    return cli;
}

json parse_body(const httplib::Result& res, const std::string& where) {
    if (!res) {
        throw Error(ErrorKind::Transport, where + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(ErrorKind::Protocol, where + ": HTTP " + std::to_string(res->status) + " " + res->body);
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Protocol, where + ": malformed JSON: " + e.what());
    }
}

json post(const RemoteOptions& opts, const std::string& path, const json& body) {
    auto cli = make_client(opts);
    auto res = cli.Post(path, body.dump(), "application/json");
    return parse_body(res, "POST " + opts.endpoint + path);
}

template <typename Fn>
void for_each_batch(std::size_t n, std::size_t cap, Fn&& fn) {
    const std::size_t step = std::max<std::size_t>(cap, 1);
    for (std::size_t i = 0; i < n; i += step) fn(i, std::min(n, i + step));
}

}  // namespace

HealthInfo remote_health(const RemoteOptions& opts) {
    auto cli = make_client(opts);
    json j = parse_body(cli.Get("/v1/health"), "GET " + opts.endpoint + "/v1/health");
    try {
        HealthInfo h;
        h.status = j.at("status").get<std::string>();
        h.dim = j.at("dim").get<std::size_t>();
        if (auto m = j.find("models"); m != j.end() && m->is_object()) {
            h.embedder_model = m->value("embedder", "");
            h.scorer_model = m->value("mlm", "");
        }
        return h;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Protocol, std::string("health response: ") + e.what());
    }
}

std::vector<Embedding> remote_embed(std::span<const std::string> texts, const RemoteOptions& opts,
                                    std::size_t expected_dim) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for_each_batch(texts.size(), opts.max_batch, [&](std::size_t lo, std::size_t hi) {
        json req = {{"texts", json::array()}};
        for (std::size_t i = lo; i < hi; ++i) req["texts"].push_back(texts[i]);
        json res = post(opts, "/v1/embed", req);
        try {
            const auto dim = res.at("dim").get<std::size_t>();
            if (expected_dim != 0 && dim != expected_dim) {
                throw Error(ErrorKind::DimensionMismatch, "sidecar dim " + std::to_string(dim) + ", expected " +
                                                              std::to_string(expected_dim));
            }
            const json& vectors = res.at("vectors");
            if (!vectors.is_array() || vectors.size() != hi - lo) {
                throw Error(ErrorKind::Protocol, "embed: vector count does not match request");
            }
            for (const json& v : vectors) {
                if (!v.is_array() || v.size() != dim) {
                    throw Error(ErrorKind::DimensionMismatch, "embed: vector length differs from advertised dim");
                }
                std::vector<double> acc;
                acc.reserve(dim);
                for (const json& c : v) {
                    const double x = c.get<double>();
                    if (!std::isfinite(x)) throw Error(ErrorKind::Protocol, "embed: non-finite component");
                    acc.push_back(x);
                }
                try {
                    out.push_back(Embedding::normalized(acc));
                } catch (const Error&) {
                    throw Error(ErrorKind::Protocol, "embed: zero vector in response");
                }
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Protocol, std::string("embed response: ") + e.what());
        }
    });
    return out;
}

std::vector<TokenLogProbs> remote_mlm_scores(std::span<const std::string> phrases, const RemoteOptions& opts) {
    std::vector<TokenLogProbs> out;
    out.reserve(phrases.size());
    for_each_batch(phrases.size(), opts.max_batch, [&](std::size_t lo, std::size_t hi) {
        json req = {{"phrases", json::array()}};
        for (std::size_t i = lo; i < hi; ++i) req["phrases"].push_back(phrases[i]);
        json res = post(opts, "/v1/mlm_scores", req);
        try {
            const json& results = res.at("results");
            if (!results.is_array() || results.size() != hi - lo) {
                throw Error(ErrorKind::Protocol, "mlm_scores: result count does not match request");
            }
            for (const json& r : results) {
                TokenLogProbs tl;
                for (const json& c : r.at("token_logprobs")) {
                    const double x = c.get<double>();
                    if (!std::isfinite(x) || x > kMaxLogProb) {
                        throw Error(ErrorKind::Protocol, "mlm_scores: log-probability not finite or above 0");
                    }
                    tl.logprobs.push_back(x);
                }
                const auto count = r.at("token_count").get<std::size_t>();
                if (count != tl.logprobs.size() || count == 0) {
                    throw Error(ErrorKind::Protocol, "mlm_scores: token_count disagrees with token_logprobs");
                }
                out.push_back(std::move(tl));
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Protocol, std::string("mlm_scores response: ") + e.what());
        }
    });
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteOptions opts, std::optional<std::size_t> expected_dim)
    : opts_(std::move(opts)) {
    if (expected_dim) {
        dim_ = *expected_dim;
    } else {
        const HealthInfo h = remote_health(opts_);
        dim_ = h.dim;
        if (!h.embedder_model.empty()) model_ = h.embedder_model;
    }
    if (dim_ == 0) throw Error(ErrorKind::Protocol, "sidecar advertised dim 0");
}

std::vector<Embedding> RemoteEmbedder::embed(std::span<const std::string> texts) const {
    return remote_embed(texts, opts_, dim_);
}

std::vector<TokenLogProbs> RemoteMlmScorer::score_batch(std::span<const std::string> phrases) const {
    return remote_mlm_scores(phrases, opts_);
}

}  // namespace tpf::backend
