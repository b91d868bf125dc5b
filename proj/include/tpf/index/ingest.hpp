#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tpf/backend/backend.hpp"
#include "tpf/index/corpus_index.hpp"

namespace tpf::index {

inline constexpr std::size_t kDefaultChunkBytes = std::size_t{5} << 20;

/// Splits text into pieces of at least `chunk_bytes` (except the last), each extended to
/// the next ASCII whitespace so no word or UTF-8 sequence is cut.
std::vector<std::string_view> split_chunks(std::string_view text, std::size_t chunk_bytes);

/// Normalized mean of per-chunk embeddings. Chunks without word tokens are skipped;
/// throws EmptyText when none remain.
backend::Embedding embed_document(std::string_view text, const backend::EmbedderBackend& embedder,
                                  std::size_t chunk_bytes = kDefaultChunkBytes);

/// Streaming variant: reads the file chunk by chunk instead of loading it whole.
/// Returns the byte count read through `bytes_read` and the number of embedded chunks.
backend::Embedding embed_file(const std::filesystem::path& path, const backend::EmbedderBackend& embedder,
                              std::size_t chunk_bytes, std::size_t* bytes_read = nullptr,
                              std::size_t* chunks = nullptr);

struct ManifestEntry {
    std::string doc_id;
    std::size_t bytes = 0;
    std::size_t chunks = 0;
};

struct SkippedFile {
    std::string path;  // relative to the corpus root
    std::string reason;
};

struct IngestManifest {
    std::string root;
    std::string backend;
    std::size_t dim = 0;
    std::size_t chunk_bytes = 0;
    std::vector<ManifestEntry> documents;
    std::vector<SkippedFile> skipped;

    std::string to_json() const;
};

struct IngestResult {
    CorpusIndex index;
    IngestManifest manifest;
};

struct IngestOptions {
    std::size_t chunk_bytes = kDefaultChunkBytes;
    unsigned jobs = 1;
};

/// One entry per readable .txt file under root_dir. Unreadable or token-free files are
/// skipped and recorded. Throws Io when root_dir is not a directory, EmptyCorpus when
/// nothing was indexed.
IngestResult ingest_corpus(const std::filesystem::path& root_dir, const backend::EmbedderBackend& embedder,
                           const IngestOptions& opts = {});

}  // namespace tpf::index
