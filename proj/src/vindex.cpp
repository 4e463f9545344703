#include "opo/vindex.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "opo/errors.hpp"

namespace opo {

namespace {

constexpr char kMagic[8] = {'O', 'P', 'O', 'I', 'D', 'X', '0', '0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IntegrityError("truncated index file");
    return v;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    auto len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IntegrityError("truncated index file");
    return s;
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw DataError("index dimension must be positive");
}

void VectorIndex::add(const std::string& rule_id, const EmbeddingVector& vector,
                      const std::string& partition_tag) {
    if (sealed_) throw DataError("index is sealed");
    if (vector.size() != dim_)
        throw DataError("vector dim " + std::to_string(vector.size()) + " does not match index dim " +
                        std::to_string(dim_));
    if (!id_set_.insert(rule_id).second) throw DataError("duplicate rule_id: " + rule_id);
    ids_.push_back(rule_id);
    tags_.push_back(partition_tag);
    data_.insert(data_.end(), vector.begin(), vector.end());
}

const EmbeddingVector VectorIndex::vector_at(std::size_t i) const {
    return EmbeddingVector(data_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                           data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
}

std::vector<SearchHit> VectorIndex::top_k(const std::vector<double>& scores,
                                          const std::vector<std::uint32_t>& candidates,
                                          std::size_t k) const {
    std::vector<std::uint32_t> order = candidates;
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids_[a] < ids_[b];
    };
    std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);
    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r)
        hits.push_back(SearchHit{ids_[order[r]], scores[order[r]], static_cast<int>(r + 1)});
    return hits;
}

std::vector<SearchHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k,
                                           const std::set<std::string>& partitions) const {
    if (k == 0) throw DataError("k must be positive");
    if (query.size() != dim_) throw DataError("query dim does not match index dim");

    std::vector<std::uint32_t> candidates;
    candidates.reserve(ids_.size());
    for (std::uint32_t i = 0; i < ids_.size(); ++i)
        if (partitions.empty() || partitions.count(tags_[i])) candidates.push_back(i);
    if (candidates.empty()) return {};

    std::vector<double> scores(ids_.size(), 0.0);
    const double* q = query.data();
    const std::int64_t n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < n; ++c) {
        std::uint32_t i = candidates[static_cast<std::size_t>(c)];
        const double* row = data_.data() + static_cast<std::size_t>(i) * dim_;
        double s = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) s += row[d] * q[d];
        scores[i] = s;
    }
    return top_k(scores, candidates, k);
}

std::vector<SearchHit> VectorIndex::search_serial(const EmbeddingVector& query, std::size_t k,
                                                  const std::set<std::string>& partitions) const {
    if (k == 0) throw DataError("k must be positive");
    if (query.size() != dim_) throw DataError("query dim does not match index dim");

    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 0; i < ids_.size(); ++i)
        if (partitions.empty() || partitions.count(tags_[i])) candidates.push_back(i);
    if (candidates.empty()) return {};

    std::vector<double> scores(ids_.size(), 0.0);
    for (std::uint32_t i : candidates) {
        const double* row = data_.data() + static_cast<std::size_t>(i) * dim_;
        double s = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) s += row[d] * query[d];
        scores[i] = s;
    }
    return top_k(scores, candidates, k);
}

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write index file: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, kFormatVersion);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
        write_string(out, ids_[i]);
        write_string(out, tags_[i]);
        out.write(reinterpret_cast<const char*>(data_.data() + i * dim_),
                  static_cast<std::streamsize>(dim_ * sizeof(double)));
    }
    if (!out) throw DataError("write failure on index file: " + path);
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IntegrityError("not an index file (bad magic): " + path);
    auto version = read_pod<std::uint32_t>(in);
    if (version != kFormatVersion)
        throw IntegrityError("index format version mismatch: found " + std::to_string(version) +
                             ", expected " + std::to_string(kFormatVersion));
    auto dim = read_pod<std::uint32_t>(in);
    auto count = read_pod<std::uint64_t>(in);
    VectorIndex ix(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string id = read_string(in);
        std::string tag = read_string(in);
        EmbeddingVector v(dim);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(dim * sizeof(double)));
        if (!in) throw IntegrityError("truncated index file");
        ix.add(id, v, tag);
    }
    ix.seal();
    return ix;
}

}  // namespace opo
