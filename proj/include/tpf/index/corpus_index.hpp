#pragma once

// Exact flat nearest-neighbour store over unit vectors, with a versioned binary format.
//
// File layout (all integers little-endian):
//   "TPFIDX\0\1"  u32 version  u32 dim  u64 count  u32 name_len  name bytes
//   count x { u32 id_len  id bytes  dim x f32 }
//   u64 fnv1a64 of every preceding byte

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tpf/backend/backend.hpp"

namespace tpf::index {

inline constexpr std::uint32_t kFormatVersion = 1;

struct RetrievalHit {
    std::string doc_id;
    double cosine = 0.0;
    std::size_t rank = 0;  // 1-based
};

class CorpusIndex {
public:
    CorpusIndex() = default;
    CorpusIndex(std::size_t dim, std::string backend_name);

    /// Throws DimensionMismatch on a wrong-length vector, InvalidArgument on a duplicate id
    /// or a vector that is not unit-norm within 1e-5.
    void add(std::string doc_id, const backend::Embedding& vec);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    const std::string& backend_name() const noexcept { return backend_name_; }
    const std::string& doc_id(std::size_t i) const { return ids_[i]; }
    std::span<const float> vector(std::size_t i) const;

    /// Exact top-k by cosine = dot / (|q| |x|); ties go to the earlier entry. k is clamped
    /// to size(). Throws EmptyIndex, DimensionMismatch, or InvalidArgument for k == 0.
    std::vector<RetrievalHit> search(const backend::Embedding& query, std::size_t k) const;

    /// Same ranking computed from squared Euclidean distance between renormalized vectors.
    /// `cosine` in the hits is 1 - d^2 / 2.
    std::vector<RetrievalHit> search_l2(const backend::Embedding& query, std::size_t k) const;

    friend bool operator==(const CorpusIndex& a, const CorpusIndex& b) noexcept;

private:
    template <typename Better>
    std::vector<std::size_t> top_k(const std::vector<double>& score, std::size_t k, Better better) const;
    void check_query(const backend::Embedding& query, std::size_t k) const;

    std::size_t dim_ = 0;
    std::string backend_name_;
    std::vector<std::string> ids_;
    std::unordered_set<std::string> known_ids_;
    std::vector<float> data_;        // size() x dim_, row-major
    std::vector<double> inv_norm_;   // 1 / |row| in double
};

std::string serialize_index(const CorpusIndex& index);
/// Throws Format on bad magic, version, checksum, or truncation.
CorpusIndex deserialize_index(std::string_view bytes);

/// Atomic write (temp + rename). Throws Io.
void save_index(const CorpusIndex& index, const std::filesystem::path& path);
/// Throws Io when unreadable, Format when corrupt.
CorpusIndex load_index(const std::filesystem::path& path);

}  // namespace tpf::index
