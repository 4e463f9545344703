#include "opo/embedding.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "opo/digest.hpp"
#include "opo/errors.hpp"

namespace opo {

using nlohmann::json;

EmbeddingVector normalize(const EmbeddingVector& values) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    if (sq <= 0.0) throw DataError("cannot normalize the zero vector");
    double inv = 1.0 / std::sqrt(sq);
    EmbeddingVector out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * inv;
    return out;
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_l2(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

DeterministicProvider::DeterministicProvider(std::size_t dim, std::string seed_tag)
    : dim_(dim), seed_tag_(std::move(seed_tag)) {}

namespace {

// splitmix64; fixed here so vectors reproduce across standard libraries.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double uniform_pm1(std::uint64_t& state) {
    // 53-bit mantissa mapped to [-1, 1)
    return static_cast<double>(splitmix64(state) >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

}  // namespace

EmbeddingVector DeterministicProvider::embed(const std::string& text) {
    if (text.empty()) throw DataError("cannot embed empty text");
    ++calls_;
    std::uint64_t state = digest_seed(seed_tag_ + "\x1f" + sha256_hex(text));
    EmbeddingVector v(dim_);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (auto& x : v) {
            x = uniform_pm1(state);
            sq += x * x;
        }
    } while (sq == 0.0);
    return normalize(v);
}

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // fresh cache
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        std::string key = rec.at("provider_id").get<std::string>() + ":" +
                          rec.at("digest").get<std::string>();
        entries_[key] = rec.at("values").get<EmbeddingVector>();
    }
}

bool EmbeddingCache::lookup(const std::string& provider_id, const std::string& digest,
                            EmbeddingVector& out) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(provider_id + ":" + digest);
    if (it == entries_.end()) return false;
    out = it->second;
    return true;
}

void EmbeddingCache::store(const std::string& provider_id, const std::string& digest,
                           const EmbeddingVector& vec) {
    std::lock_guard lock(mu_);
    std::string key = provider_id + ":" + digest;
    if (entries_.count(key)) return;
    entries_[key] = vec;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError("cannot append to embedding cache: " + path_);
    json rec{{"provider_id", provider_id},
             {"digest", digest},
             {"dim", vec.size()},
             {"values", vec}};
    out << rec.dump() << '\n';
}

CachedProvider::CachedProvider(std::shared_ptr<EmbeddingProvider> inner,
                               std::shared_ptr<EmbeddingCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

EmbeddingVector CachedProvider::embed(const std::string& text) {
    std::string digest = sha256_hex(text);
    EmbeddingVector v;
    if (cache_->lookup(provider_id(), digest, v)) return v;
    {
        std::lock_guard lock(mu_);
        if (cache_->lookup(provider_id(), digest, v)) return v;
        v = inner_->embed(text);
    }
    if (v.size() != dim())
        throw IntegrityError("provider returned dim " + std::to_string(v.size()) + ", expected " +
                             std::to_string(dim()));
    cache_->store(provider_id(), digest, v);
    return v;
}

EmbeddingVector HttpEmbeddingProvider::embed(const std::string& text) {
    return embed_batch({text}).front();
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    json body{{"texts", texts}};
    httplib::Client client(cfg_.host, cfg_.port);
    httplib::Headers headers;
    if (const char* token = std::getenv(cfg_.auth_env_var.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + token);

    int backoff = cfg_.backoff_initial_ms;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res || res->status >= 500) {
            last_error = res ? "server status " + std::to_string(res->status) : "transport failure";
            continue;
        }
        if (res->status != 200)
            throw ProviderError("embedding backend rejected request: status " +
                                std::to_string(res->status));
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProviderError(std::string("non-parseable embedding payload: ") + e.what());
        }
        std::vector<EmbeddingVector> out;
        for (const auto& item : reply.at("embeddings")) {
            EmbeddingVector v = item.get<EmbeddingVector>();
            if (v.size() != cfg_.dim)
                throw IntegrityError("remote embedding dim " + std::to_string(v.size()) +
                                     " does not match declared " + std::to_string(cfg_.dim));
            out.push_back(normalize(v));
        }
        if (out.size() != texts.size())
            throw IntegrityError("embedding batch size mismatch");
        return out;
    }
    throw ProviderError("embedding backend failed after " + std::to_string(cfg_.max_retries) +
                        " retries: " + last_error);
}

}  // namespace opo
