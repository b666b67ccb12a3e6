#include "setplan/golden_library.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "setplan/error.hpp"

namespace setplan::library {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const char* data, std::size_t len) {
    std::uint64_t h = kFnvOffset;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= kFnvPrime;
    }
    return h;
}

// Lowercase ASCII, collapse whitespace runs, trim ends.
std::string normalize_text(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    }
    return out;
}

std::string format_component(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::vector<double> FallbackEmbedder::embed(const std::string& text) const {
    const std::string norm = normalize_text(text);
    if (norm.empty())
        throw Error(ErrorKind::ZeroInput, "cannot embed empty text");

    std::vector<double> v(kDimension, 0.0);
    auto add_gram = [&](const char* data, std::size_t len) {
        std::uint64_t h = fnv1a(data, len);
        std::size_t bucket = static_cast<std::size_t>(h % kDimension);
        double sign = ((h >> 8) & 1) ? 1.0 : -1.0;
        v[bucket] += sign;
    };
    if (norm.size() < 3) {
        add_gram(norm.data(), norm.size());
    } else {
        for (std::size_t i = 0; i + 3 <= norm.size(); ++i) add_gram(norm.data() + i, 3);
    }

    double norm2 = std::sqrt(dot(v, v));
    if (norm2 == 0.0) {
        // Grams cancelled; fall back to a single deterministic bucket.
        v[static_cast<std::size_t>(fnv1a(norm.data(), norm.size()) % kDimension)] = 1.0;
        norm2 = 1.0;
    }
    for (double& x : v) x /= norm2;
    return v;
}

HttpProviderConfig HttpProviderConfig::from_env() {
    HttpProviderConfig c;
    if (const char* url = std::getenv("SETPLAN_EMBED_URL")) c.url = url;
    if (const char* tok = std::getenv("SETPLAN_EMBED_TOKEN")) c.auth_token = tok;
    if (const char* dim = std::getenv("SETPLAN_EMBED_DIM")) c.dimension = std::atoi(dim);
    return c;
}

std::vector<std::int64_t> sample_indices(std::int64_t total, double fraction) {
    std::vector<std::int64_t> out;
    if (total <= 0) return out;
    if (fraction >= 1.0) {
        out.resize(static_cast<std::size_t>(total));
        for (std::int64_t i = 0; i < total; ++i) out[static_cast<std::size_t>(i)] = i;
        return out;
    }
    if (fraction <= 0.0) throw Error(ErrorKind::Config, "sample fraction must be positive");
    const auto cap = static_cast<std::int64_t>(static_cast<double>(total) * fraction);
    const auto stride = static_cast<std::int64_t>(1.0 / fraction);
    for (std::int64_t i = 0; i < total && static_cast<std::int64_t>(out.size()) < cap; i += stride)
        out.push_back(i);
    return out;
}

GoldenLibrary::GoldenLibrary(std::shared_ptr<const EmbeddingProvider> provider)
    : provider_(std::move(provider)) {
    if (!provider_) throw Error(ErrorKind::Config, "library needs an embedding provider");
}

std::int64_t GoldenLibrary::add_case(const ProblemContext& context,
                                     const plan::PlanDescriptor& plan) {
    std::vector<double> embedding = provider_->embed(context.joined());
    if (static_cast<int>(embedding.size()) != provider_->dimension())
        throw Error(ErrorKind::Provider, "provider returned a vector of the wrong dimension");
    double n = std::sqrt(dot(embedding, embedding));
    if (std::abs(n - 1.0) > 1e-9) {
        if (n == 0.0) throw Error(ErrorKind::Provider, "provider returned a zero vector");
        for (double& x : embedding) x /= n;
    }

    std::unique_lock lock(*mutex_);
    Case c;
    c.id = static_cast<std::int64_t>(cases_.size());
    c.context = context;
    c.embedding = std::move(embedding);
    c.plan = plan;
    cases_.push_back(std::move(c));
    return cases_.back().id;
}

std::vector<RetrievedCase> GoldenLibrary::retrieve(const ProblemContext& context, int n) const {
    if (n < 1) throw Error(ErrorKind::Config, "retrieval size must be at least 1");
    std::vector<double> query = provider_->embed(context.joined());

    std::shared_lock lock(*mutex_);
    std::vector<RetrievedCase> scored;
    scored.reserve(cases_.size());
    for (const auto& c : cases_) {
        if (c.embedding.size() != query.size())
            throw Error(ErrorKind::Data, "case embedding dimension does not match the provider");
        scored.push_back({&c, dot(query, c.embedding)});
    }
    std::sort(scored.begin(), scored.end(), [](const RetrievedCase& a, const RetrievedCase& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.entry->id < b.entry->id;
    });
    if (static_cast<int>(scored.size()) > n) scored.resize(static_cast<std::size_t>(n));
    return scored;
}

std::size_t GoldenLibrary::size() const {
    std::shared_lock lock(*mutex_);
    return cases_.size();
}

const Case& GoldenLibrary::case_by_id(std::int64_t id) const {
    std::shared_lock lock(*mutex_);
    if (id < 0 || id >= static_cast<std::int64_t>(cases_.size()))
        throw Error(ErrorKind::Reference, "no case with id " + std::to_string(id));
    return cases_[static_cast<std::size_t>(id)];
}

std::string GoldenLibrary::serialize() const {
    std::shared_lock lock(*mutex_);
    std::string out;
    json header;
    header["record"] = "header";
    header["version"] = 1;
    header["kind"] = "golden-library";
    header["dimension"] = provider_->dimension();
    out += header.dump();
    out += '\n';
    for (const auto& c : cases_) {
        json rec;
        rec["record"] = "case";
        rec["id"] = c.id;
        rec["query_text"] = c.context.query_text;
        rec["caption"] = c.context.caption;
        json emb = json::array();
        for (double v : c.embedding) emb.push_back(format_component(v));
        rec["embedding"] = std::move(emb);
        rec["plan"] = json::parse(plan::plan_to_json(c.plan));
        out += rec.dump();
        out += '\n';
    }
    return out;
}

GoldenLibrary GoldenLibrary::deserialize(const std::string& text,
                                         std::shared_ptr<const EmbeddingProvider> provider) {
    GoldenLibrary lib(std::move(provider));
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Data, std::string("bad library record: ") + e.what());
        }
        const std::string kind = rec.value("record", "");
        if (kind == "header") {
            if (!rec.contains("version") || rec["version"].get<int>() != 1)
                throw Error(ErrorKind::Data, "unsupported library format version");
            have_header = true;
        } else if (kind == "case") {
            if (!have_header) throw Error(ErrorKind::Data, "case record before library header");
            Case c;
            c.id = rec.at("id").get<std::int64_t>();
            if (c.id != static_cast<std::int64_t>(lib.cases_.size()))
                throw Error(ErrorKind::Data, "case ids out of sequence");
            c.context.query_text = rec.at("query_text").get<std::string>();
            c.context.caption = rec.at("caption").get<std::string>();
            for (const auto& comp : rec.at("embedding"))
                c.embedding.push_back(std::strtod(comp.get<std::string>().c_str(), nullptr));
            c.plan = plan::plan_from_json(rec.at("plan").dump());
            lib.cases_.push_back(std::move(c));
        } else {
            throw Error(ErrorKind::Data, "unknown library record type: " + kind);
        }
    }
    if (!have_header) throw Error(ErrorKind::Data, "library file has no header record");
    return lib;
}

void GoldenLibrary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << serialize();
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

GoldenLibrary GoldenLibrary::load(const std::string& path,
                                  std::shared_ptr<const EmbeddingProvider> provider) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return GoldenLibrary::deserialize(buf.str(), std::move(provider));
}

}  // namespace setplan::library
