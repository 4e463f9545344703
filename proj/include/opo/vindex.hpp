#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opo/embedding.hpp"

namespace opo {

struct SearchHit {
    std::string rule_id;
    double score = 0.0;  // cosine similarity on unit vectors
    int rank = 0;        // 1-based
};

// Exact (flat) vector index. Build phase is exclusive; after seal() the
// index is immutable and searches are safe to run concurrently.
//
// Search scores are cosine similarity. Hits are ordered by score
// descending, ties broken by rule_id ascending.
class VectorIndex {
  public:
    explicit VectorIndex(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }

    void add(const std::string& rule_id, const EmbeddingVector& vector,
             const std::string& partition_tag);
    void seal() { sealed_ = true; }

    // Empty `partitions` means search all partitions. k must be >= 1.
    // The OpenMP-parallel scan; results are identical to search_serial.
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k,
                                  const std::set<std::string>& partitions = {}) const;

    // Serial reference scan, kept for differential testing and benchmarks.
    std::vector<SearchHit> search_serial(const EmbeddingVector& query, std::size_t k,
                                         const std::set<std::string>& partitions = {}) const;

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<std::string>& partition_tags() const { return tags_; }
    const EmbeddingVector vector_at(std::size_t i) const;

  private:
    std::size_t dim_;
    bool sealed_ = false;
    std::vector<std::string> ids_;
    std::vector<std::string> tags_;
    std::vector<double> data_;  // row-major, size() * dim_
    std::set<std::string> id_set_;

    std::vector<SearchHit> top_k(const std::vector<double>& scores,
                                 const std::vector<std::uint32_t>& candidates,
                                 std::size_t k) const;
};

}  // namespace opo
