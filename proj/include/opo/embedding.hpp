#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace opo {

using EmbeddingVector = std::vector<double>;

// Scales to unit Euclidean norm; throws on the zero vector.
EmbeddingVector normalize(const EmbeddingVector& values);

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double squared_l2(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string provider_id() const = 0;
    virtual std::size_t dim() const = 0;
    // Returns a unit-norm vector of length dim(). Must be deterministic.
    virtual EmbeddingVector embed(const std::string& text) = 0;
};

// Pseudo-random unit vector seeded by a cryptographic digest of
// (provider seed, text). Reproducible across processes and platforms.
class DeterministicProvider : public EmbeddingProvider {
  public:
    DeterministicProvider(std::size_t dim, std::string seed_tag = "test-v1");
    std::string provider_id() const override { return "det-" + seed_tag_; }
    std::size_t dim() const override { return dim_; }
    EmbeddingVector embed(const std::string& text) override;
    std::uint64_t call_count() const { return calls_; }

  private:
    std::size_t dim_;
    std::string seed_tag_;
    std::uint64_t calls_ = 0;
};

// On-disk append-only cache keyed by (provider_id, content digest).
class EmbeddingCache {
  public:
    explicit EmbeddingCache(std::string path);
    bool lookup(const std::string& provider_id, const std::string& digest,
                EmbeddingVector& out) const;
    void store(const std::string& provider_id, const std::string& digest,
               const EmbeddingVector& vec);

  private:
    std::string path_;
    mutable std::mutex mu_;
    std::map<std::string, EmbeddingVector> entries_;  // key = provider_id + ":" + digest
};

// Provider wrapper that consults the cache before invoking the inner
// provider; callable concurrently.
class CachedProvider : public EmbeddingProvider {
  public:
    CachedProvider(std::shared_ptr<EmbeddingProvider> inner, std::shared_ptr<EmbeddingCache> cache);
    std::string provider_id() const override { return inner_->provider_id(); }
    std::size_t dim() const override { return inner_->dim(); }
    EmbeddingVector embed(const std::string& text) override;

  private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<EmbeddingCache> cache_;
    std::mutex mu_;
};

struct HttpEmbeddingConfig {
    std::string host;
    int port = 443;
    std::string path = "/v1/embeddings";
    std::string auth_env_var = "OPO_EMBED_TOKEN";
    std::string provider_id = "remote";
    std::size_t dim = 1536;
    int max_retries = 3;
    int backoff_initial_ms = 100;
};

// Batched JSON-over-HTTP embedding provider with bounded retries; verifies
// the declared dimension on every response.
class HttpEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig cfg) : cfg_(std::move(cfg)) {}
    std::string provider_id() const override { return cfg_.provider_id; }
    std::size_t dim() const override { return cfg_.dim; }
    EmbeddingVector embed(const std::string& text) override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);

  private:
    HttpEmbeddingConfig cfg_;
};

}  // namespace opo
