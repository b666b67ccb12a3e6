#pragma once

#include <deque>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "setplan/plan.hpp"

namespace setplan::library {

struct ProblemContext {
    std::string query_text;
    std::string caption;

    // Canonical embedding input: query, newline, caption.
    std::string joined() const { return query_text + "\n" + caption; }
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dimension() const = 0;
    // Deterministic per provider: the same text always maps to the same
    // unit vector. Failures throw Error with the Provider kind (retriable).
    virtual std::vector<double> embed(const std::string& text) const = 0;
};

// Offline substitute: character-3-gram feature hashing into 256
// dimensions, signed and L2-normalized. Stable across runs and platforms.
class FallbackEmbedder : public EmbeddingProvider {
public:
    static constexpr int kDimension = 256;
    int dimension() const override { return kDimension; }
    std::vector<double> embed(const std::string& text) const override;
};

struct HttpProviderConfig {
    std::string url;        // e.g. http://host:port/embed
    std::string auth_token;
    int dimension = 0;
    int timeout_ms = 10'000;
    int max_retries = 2;

    // Reads SETPLAN_EMBED_URL / SETPLAN_EMBED_TOKEN / SETPLAN_EMBED_DIM.
    static HttpProviderConfig from_env();
};

// POSTs {"texts":[...]} to the endpoint and expects
// {"embeddings":[[...]]}; retries transient failures before giving up
// with a retriable provider error.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpProviderConfig config);
    int dimension() const override { return config_.dimension; }
    std::vector<double> embed(const std::string& text) const override;

private:
    HttpProviderConfig config_;
};

struct Case {
    std::int64_t id = 0;
    ProblemContext context;
    std::vector<double> embedding;  // unit vector
    plan::PlanDescriptor plan;
};

// Sampling convention for building a library from a fraction of a corpus:
// every floor(1/fraction)-th record, capped at floor(total * fraction)
// records. fraction >= 1 keeps everything.
std::vector<std::int64_t> sample_indices(std::int64_t total, double fraction);

struct RetrievedCase {
    const Case* entry = nullptr;
    double similarity = 0.0;
};

// Append-only store of optimal trajectories keyed by problem-context
// embeddings. Retrieval is an exact cosine top-N scan. Safe for many
// concurrent readers with a single appending writer.
class GoldenLibrary {
public:
    explicit GoldenLibrary(std::shared_ptr<const EmbeddingProvider> provider =
                               std::make_shared<FallbackEmbedder>());

    std::int64_t add_case(const ProblemContext& context, const plan::PlanDescriptor& plan);

    // Descending cosine similarity, ties by ascending case id; returns
    // fewer than n when the library is smaller. An empty library returns
    // an empty list.
    std::vector<RetrievedCase> retrieve(const ProblemContext& context, int n) const;

    std::size_t size() const;
    const Case& case_by_id(std::int64_t id) const;

    // Versioned line-delimited records; embeddings are stored as decimal
    // strings rounded to 9 places so reload/save round-trips byte for
    // byte.
    void save(const std::string& path) const;
    static GoldenLibrary load(const std::string& path,
                              std::shared_ptr<const EmbeddingProvider> provider =
                                  std::make_shared<FallbackEmbedder>());
    std::string serialize() const;
    static GoldenLibrary deserialize(const std::string& text,
                                     std::shared_ptr<const EmbeddingProvider> provider);

    const EmbeddingProvider& provider() const { return *provider_; }

private:
    std::shared_ptr<const EmbeddingProvider> provider_;
    std::deque<Case> cases_;  // append-only; references stay valid across growth
    std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

}  // namespace setplan::library
