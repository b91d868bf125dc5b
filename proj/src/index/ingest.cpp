#include "tpf/index/ingest.hpp"

#include <cmath>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "tpf/error.hpp"
#include "tpf/io.hpp"
#include "tpf/parallel.hpp"
#include "tpf/text/textmodel.hpp"

namespace fs = std::filesystem;

namespace tpf::index {

namespace {

bool ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class ChunkMean {
public:
    explicit ChunkMean(const backend::EmbedderBackend& embedder) : embedder_(embedder), acc_(embedder.dim(), 0.0) {}

    void add(std::string_view chunk) {
        if (text::word_tokens(chunk).empty()) return;
        const auto e = embedder_.embed_one(chunk);
        if (e.dim() != acc_.size()) {
            throw Error(ErrorKind::DimensionMismatch, embedder_.name() + " returned a vector of dim " +
                                                          std::to_string(e.dim()));
        }
        for (std::size_t j = 0; j < acc_.size(); ++j) acc_[j] += e.values()[j];
        ++count_;
    }

    std::size_t count() const noexcept { return count_; }

    backend::Embedding finish() const {
        if (count_ == 0) throw Error(ErrorKind::EmptyText, "document has no word tokens");
        std::vector<double> mean(acc_.size());
        for (std::size_t j = 0; j < acc_.size(); ++j) mean[j] = acc_[j] / static_cast<double>(count_);
        return backend::Embedding::normalized(mean);
    }

private:
    const backend::EmbedderBackend& embedder_;
    std::vector<double> acc_;
    std::size_t count_ = 0;
};

void check_chunk_bytes(std::size_t chunk_bytes) {
    if (chunk_bytes == 0) throw Error(ErrorKind::InvalidArgument, "chunk_bytes must be positive");
}

}  // namespace

std::vector<std::string_view> split_chunks(std::string_view text, std::size_t chunk_bytes) {
    check_chunk_bytes(chunk_bytes);
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = std::min(text.size(), pos + chunk_bytes);
        while (end < text.size() && !ascii_space(text[end])) ++end;
        out.push_back(text.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

backend::Embedding embed_document(std::string_view text, const backend::EmbedderBackend& embedder,
                                  std::size_t chunk_bytes) {
    ChunkMean mean(embedder);
    for (std::string_view c : split_chunks(text, chunk_bytes)) mean.add(c);
    return mean.finish();
}

backend::Embedding embed_file(const fs::path& path, const backend::EmbedderBackend& embedder, std::size_t chunk_bytes,
                              std::size_t* bytes_read, std::size_t* chunks) {
    check_chunk_bytes(chunk_bytes);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

    ChunkMean mean(embedder);
    std::size_t total = 0;
    std::string chunk;
    std::optional<char> carry;  // first byte of the next chunk, read while extending
    while (true) {
        chunk.clear();
        if (carry) chunk.push_back(*carry);
        carry.reset();
        const std::size_t want = chunk_bytes - chunk.size();
        const std::size_t base = chunk.size();
        chunk.resize(base + want);
        in.read(chunk.data() + base, static_cast<std::streamsize>(want));
        chunk.resize(base + static_cast<std::size_t>(in.gcount()));
        if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
        if (chunk.empty()) break;
        if (chunk.size() == chunk_bytes) {
            char c;
            while (in.get(c)) {
                if (ascii_space(c)) {
                    carry = c;
                    break;
                }
                chunk.push_back(c);
            }
            if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
        }
        total += chunk.size();
        mean.add(chunk);
        if (!carry && !in) break;
    }
    if (bytes_read) *bytes_read = total;
    if (chunks) *chunks = mean.count();
    return mean.finish();
}

std::string IngestManifest::to_json() const {
    nlohmann::ordered_json j;
    j["root"] = root;
    j["backend"] = backend;
    j["dim"] = dim;
    j["chunk_bytes"] = chunk_bytes;
    j["document_count"] = documents.size();
    j["documents"] = nlohmann::ordered_json::array();
    for (const auto& d : documents) {
        j["documents"].push_back({{"doc_id", d.doc_id}, {"bytes", d.bytes}, {"chunks", d.chunks}});
    }
    j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& s : skipped) j["skipped"].push_back({{"path", s.path}, {"reason", s.reason}});
    return j.dump(2) + "\n";
}

IngestResult ingest_corpus(const fs::path& root_dir, const backend::EmbedderBackend& embedder,
                           const IngestOptions& opts) {
    check_chunk_bytes(opts.chunk_bytes);
    const auto files = io::list_text_files(root_dir);

    struct Slot {
        std::optional<backend::Embedding> vec;
        std::size_t bytes = 0;
        std::size_t chunks = 0;
        std::string skip_reason;
    };
    std::vector<Slot> slots(files.size());
    parallel_for(files.size(), opts.jobs, [&](std::size_t i) {
        try {
            slots[i].vec = embed_file(files[i], embedder, opts.chunk_bytes, &slots[i].bytes, &slots[i].chunks);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Io && e.kind() != ErrorKind::EmptyText) throw;
            slots[i].skip_reason = std::string(to_string(e.kind())) + ": " + e.what();
        }
    });

    IngestResult out{CorpusIndex(embedder.dim(), embedder.name()), {}};
    out.manifest.root = root_dir.generic_string();
    out.manifest.backend = embedder.name();
    out.manifest.dim = embedder.dim();
    out.manifest.chunk_bytes = opts.chunk_bytes;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!slots[i].vec) {
            out.manifest.skipped.push_back({files[i].lexically_relative(root_dir).generic_string(), slots[i].skip_reason});
            continue;
        }
        std::string id = io::doc_id_for(root_dir, files[i]);
        out.index.add(id, *slots[i].vec);
        out.manifest.documents.push_back({std::move(id), slots[i].bytes, slots[i].chunks});
    }
    if (out.index.empty()) {
        throw Error(ErrorKind::EmptyCorpus, "no documents indexed under " + root_dir.string() + " (" +
                                                std::to_string(out.manifest.skipped.size()) + " skipped)");
    }
    return out;
}

}  // namespace tpf::index
