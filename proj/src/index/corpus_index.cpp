#include "tpf/index/corpus_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "tpf/error.hpp"
#include "tpf/hash.hpp"
#include "tpf/io.hpp"
#include "tpf/simd/kernels.hpp"

namespace tpf::index {

namespace {

constexpr char kMagic[8] = {'T', 'P', 'F', 'I', 'D', 'X', '\0', '\1'};

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

template <typename T>
void put_le(std::string& out, T v) {
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>(u & 0xffu));
        u = static_cast<U>(u >> 8);
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const noexcept { return pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Format, "index file is truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

double inverse_norm(std::span<const float> v) {
    const double sq = simd::squared_norm(v);
    return sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
}

}  // namespace

CorpusIndex::CorpusIndex(std::size_t dim, std::string backend_name)
    : dim_(dim), backend_name_(std::move(backend_name)) {
    if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "index dimension must be positive");
}

void CorpusIndex::add(std::string doc_id, const backend::Embedding& vec) {
    if (vec.dim() != dim_) {
        throw Error(ErrorKind::DimensionMismatch, "vector for '" + doc_id + "' has dim " + std::to_string(vec.dim()) +
                                                      ", index dim is " + std::to_string(dim_));
    }
    if (std::abs(vec.norm() - 1.0) > 1e-5) {
        throw Error(ErrorKind::InvalidArgument, "vector for '" + doc_id + "' is not unit-norm");
    }
    if (!known_ids_.insert(doc_id).second) {
        throw Error(ErrorKind::InvalidArgument, "duplicate doc_id '" + doc_id + "'");
    }
    data_.insert(data_.end(), vec.values().begin(), vec.values().end());
    inv_norm_.push_back(inverse_norm(vec.values()));
    ids_.push_back(std::move(doc_id));
}

std::span<const float> CorpusIndex::vector(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
}

void CorpusIndex::check_query(const backend::Embedding& query, std::size_t k) const {
    if (empty()) throw Error(ErrorKind::EmptyIndex, "index has no entries");
    if (query.dim() != dim_) {
        throw Error(ErrorKind::DimensionMismatch, "query dim " + std::to_string(query.dim()) + " does not match index dim " +
                                                      std::to_string(dim_) + " (backend " + backend_name_ + ")");
    }
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
}

template <typename Better>
std::vector<std::size_t> CorpusIndex::top_k(const std::vector<double>& score, std::size_t k, Better better) const {
    k = std::min(k, size());
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (score[a] != score[b]) return better(score[a], score[b]);
                          return a < b;
                      });
    order.resize(k);
    return order;
}

std::vector<RetrievalHit> CorpusIndex::search(const backend::Embedding& query, std::size_t k) const {
    check_query(query, k);
    std::vector<double> dots(size());
    simd::dot_rows(data_, dim_, query.values(), dots);
    const double inv_q = inverse_norm(query.values());
    std::vector<double> cos(size());
    for (std::size_t i = 0; i < size(); ++i) cos[i] = dots[i] * inv_norm_[i] * inv_q;

    std::vector<RetrievalHit> hits;
    for (std::size_t i : top_k(cos, k, [](double a, double b) { return a > b; })) {
        hits.push_back({ids_[i], cos[i], hits.size() + 1});
    }
    return hits;
}

std::vector<RetrievalHit> CorpusIndex::search_l2(const backend::Embedding& query, std::size_t k) const {
    check_query(query, k);
    const double inv_q = inverse_norm(query.values());
    std::vector<double> d2(size());
    for (std::size_t i = 0; i < size(); ++i) {
        d2[i] = simd::squared_l2_scaled(vector(i), inv_norm_[i], query.values(), inv_q);
    }
    std::vector<RetrievalHit> hits;
    for (std::size_t i : top_k(d2, k, [](double a, double b) { return a < b; })) {
        hits.push_back({ids_[i], 1.0 - d2[i] / 2.0, hits.size() + 1});
    }
    return hits;
}

bool operator==(const CorpusIndex& a, const CorpusIndex& b) noexcept {
    if (a.dim_ != b.dim_ || a.backend_name_ != b.backend_name_ || a.ids_ != b.ids_) return false;
    if (a.data_.size() != b.data_.size()) return false;
    return a.data_.empty() || std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

std::string serialize_index(const CorpusIndex& index) {
    std::string out(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(out, kFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dim()));
    put_le<std::uint64_t>(out, index.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.backend_name().size()));
    out += index.backend_name();
    for (std::size_t i = 0; i < index.size(); ++i) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.doc_id(i).size()));
        out += index.doc_id(i);
        for (float f : index.vector(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
    }
    put_le<std::uint64_t>(out, fnv1a64(out));
    return out;
}

CorpusIndex deserialize_index(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw Error(ErrorKind::Format, "not an index file (bad magic)");
    }
    if (bytes.size() < sizeof kMagic + 8) throw Error(ErrorKind::Format, "index file is truncated");
    const std::string_view body = bytes.substr(0, bytes.size() - 8);

    Reader r(bytes);
    r.take(sizeof kMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kFormatVersion) {
        throw Error(ErrorKind::Format, "unsupported index format version " + std::to_string(version));
    }
    Reader tail(bytes.substr(body.size()));
    if (tail.get<std::uint64_t>() != fnv1a64(body)) {
        throw Error(ErrorKind::Format, "index checksum mismatch (file corrupt or truncated)");
    }

    const auto dim = r.get<std::uint32_t>();
    const auto count = r.get<std::uint64_t>();
    const auto name_len = r.get<std::uint32_t>();
    CorpusIndex index;
    try {
        index = CorpusIndex(dim, std::string(r.take(name_len)));
    } catch (const Error& e) {
        throw Error(ErrorKind::Format, std::string("index header: ") + e.what());
    }
    std::vector<float> comps(dim);
    for (std::uint64_t n = 0; n < count; ++n) {
        const auto id_len = r.get<std::uint32_t>();
        std::string id(r.take(id_len));
        for (std::uint32_t j = 0; j < dim; ++j) comps[j] = std::bit_cast<float>(r.get<std::uint32_t>());
        try {
            index.add(std::move(id), backend::Embedding(comps));
        } catch (const Error& e) {
            throw Error(ErrorKind::Format, std::string("index entry: ") + e.what());
        }
    }
    if (r.pos() != body.size()) throw Error(ErrorKind::Format, "trailing bytes after index entries");
    return index;
}

void save_index(const CorpusIndex& index, const std::filesystem::path& path) {
    io::write_file_atomic(path, serialize_index(index));
}

CorpusIndex load_index(const std::filesystem::path& path) {
    try {
        return deserialize_index(io::read_file(path));
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

}  // namespace tpf::index
