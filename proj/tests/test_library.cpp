#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <thread>

#include "setplan/golden_library.hpp"
#include "test_support.hpp"

using namespace setplan;
using namespace setplan::library;
using testsupport::CounterRng;

namespace {

plan::PlanDescriptor sample_plan(int variant) {
    plan::ToolCall pos{"toolA", "find red objects v" + std::to_string(variant),
                       core::Polarity::Positive, 10};
    plan::ToolCall neg{"toolB", "avoid leaves", core::Polarity::Negative, 5};
    return plan::two_clause_descriptor({pos}, {neg});
}

ProblemContext context_of(const std::string& q, const std::string& c) { return {q, c}; }

}  // namespace

TEST_CASE("fallback embedder is deterministic and unit-norm") {
    FallbackEmbedder embedder;
    auto a = embedder.embed("abc");
    auto b = embedder.embed("abc");
    CHECK(a == b);
    double norm = 0.0;
    for (double v : a) norm += v * v;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-9);
    CHECK(static_cast<int>(a.size()) == FallbackEmbedder::kDimension);
    CHECK_THROWS_AS(embedder.embed("   "), Error);

    // normalization folds case and whitespace
    CHECK(embedder.embed("Red  Car") == embedder.embed("red car"));
    // short texts still embed
    auto tiny = embedder.embed("ab");
    CHECK(static_cast<int>(tiny.size()) == FallbackEmbedder::kDimension);
}

TEST_CASE("adding cases assigns distinct stable ids") {
    GoldenLibrary lib;
    auto id0 = lib.add_case(context_of("q0", "c0"), sample_plan(0));
    auto id1 = lib.add_case(context_of("q1", "c1"), sample_plan(1));
    auto id2 = lib.add_case(context_of("q2", "c2"), sample_plan(2));
    CHECK(lib.size() == 3);
    CHECK(id0 == 0);
    CHECK(id1 == 1);
    CHECK(id2 == 2);
}

TEST_CASE("duplicate contexts are kept with identical embeddings") {
    GoldenLibrary lib;
    lib.add_case(context_of("same text", "same caption"), sample_plan(0));
    lib.add_case(context_of("same text", "same caption"), sample_plan(1));
    CHECK(lib.size() == 2);
    CHECK(lib.case_by_id(0).embedding == lib.case_by_id(1).embedding);
}

TEST_CASE("retrieval: exact match first, truncated by library size") {
    GoldenLibrary lib;
    lib.add_case(context_of("find chickens in a barn", "farm photo"), sample_plan(0));
    lib.add_case(context_of("city skyline at night", "urban photo"), sample_plan(1));
    auto hits = lib.retrieve(context_of("find chickens in a barn", "farm photo"), 4);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].entry->id == 0);
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hits[1].similarity < hits[0].similarity);

    GoldenLibrary empty;
    CHECK(empty.retrieve(context_of("anything", "anything"), 3).empty());
}

TEST_CASE("retrieval equals an exhaustive cosine scan") {
    GoldenLibrary lib;
    CounterRng rng(909, 0, 0);
    std::vector<std::string> texts;
    for (int j = 0; j < 100; ++j) {
        std::string text = "doc";
        for (int w = 0; w < 6; ++w)
            text += " w" + std::to_string(rng.next_below(40));
        texts.push_back(text);
        lib.add_case(context_of(text, "cap" + std::to_string(j % 7)), sample_plan(j % 3));
    }
    FallbackEmbedder embedder;
    for (int q = 0; q < 20; ++q) {
        ProblemContext probe{"doc w" + std::to_string(q) + " w" + std::to_string(q + 1),
                             "cap" + std::to_string(q % 7)};
        auto got = lib.retrieve(probe, 5);
        REQUIRE(got.size() == 5);

        auto qv = embedder.embed(probe.joined());
        std::vector<std::pair<double, std::int64_t>> scan;
        for (std::size_t j = 0; j < lib.size(); ++j) {
            const Case& c = lib.case_by_id(static_cast<std::int64_t>(j));
            double dot = 0.0;
            for (std::size_t d = 0; d < qv.size(); ++d) dot += qv[d] * c.embedding[d];
            scan.push_back({dot, c.id});
        }
        std::sort(scan.begin(), scan.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (int r = 0; r < 5; ++r) {
            CHECK(got[static_cast<std::size_t>(r)].entry->id == scan[static_cast<std::size_t>(r)].second);
        }
    }
}

TEST_CASE("planted lexical clusters retrieve their own") {
    GoldenLibrary lib;
    for (int cluster = 0; cluster < 4; ++cluster) {
        for (int j = 0; j < 5; ++j) {
            std::string q = "cluster" + std::to_string(cluster) + " query tok" +
                            std::to_string(cluster) + "_a tok" + std::to_string(cluster) + "_b";
            lib.add_case(context_of(q, "caption tok" + std::to_string(cluster) + "_c"),
                         sample_plan(cluster));
        }
    }
    for (int cluster = 0; cluster < 4; ++cluster) {
        std::string probe_q = "cluster" + std::to_string(cluster) + " query tok" +
                              std::to_string(cluster) + "_b tok" + std::to_string(cluster) + "_a";
        auto hits =
            lib.retrieve(context_of(probe_q, "caption tok" + std::to_string(cluster) + "_c"), 1);
        REQUIRE(hits.size() == 1);
        // nearest case shares the planted cluster
        CHECK(hits[0].entry->context.query_text.find("cluster" + std::to_string(cluster)) !=
              std::string::npos);
    }
}

TEST_CASE("persistence round-trips byte for byte") {
    GoldenLibrary lib;
    CounterRng rng(910, 0, 0);
    for (int j = 0; j < 25; ++j) {
        std::string q = "query " + std::to_string(rng.next_below(1000));
        lib.add_case(context_of(q, "caption " + std::to_string(j)), sample_plan(j % 4));
    }
    std::string once = lib.serialize();
    GoldenLibrary reloaded =
        GoldenLibrary::deserialize(once, std::make_shared<FallbackEmbedder>());
    CHECK(reloaded.size() == lib.size());
    CHECK(reloaded.serialize() == once);

    // plans survive the trip
    const Case& c = reloaded.case_by_id(3);
    CHECK(c.plan.composer == "two_clause");
    CHECK(c.plan.calls.size() == 2);
    CHECK(c.plan.steps.steps.back().name == "final");
}

TEST_CASE("case plans carry no image ids") {
    // A stored plan references tools, queries, polarities and k only; its
    // JSON has no results arrays.
    std::string text = plan::plan_to_json(sample_plan(0));
    CHECK(text.find("results") == std::string::npos);
    CHECK(text.find("\"tool\"") != std::string::npos);
    CHECK(text.find("\"k\"") != std::string::npos);
}

TEST_CASE("concurrent readers during appends see consistent snapshots") {
    GoldenLibrary lib;
    for (int j = 0; j < 50; ++j)
        lib.add_case(context_of("seed " + std::to_string(j), "c"), sample_plan(j % 2));

    std::atomic<bool> stop{false};
    std::atomic<int> failures{0};
    std::thread reader([&]() {
        while (!stop.load()) {
            auto hits = lib.retrieve(context_of("seed 10", "c"), 3);
            if (hits.size() != 3) failures.fetch_add(1);
            // results stay dereferenceable while the writer appends
            for (const auto& hit : hits) {
                if (hit.entry->context.query_text.empty()) failures.fetch_add(1);
            }
        }
    });
    for (int j = 0; j < 200; ++j)
        lib.add_case(context_of("more " + std::to_string(j), "c"), sample_plan(j % 2));
    stop.store(true);
    reader.join();
    CHECK(failures.load() == 0);
    CHECK(lib.size() == 250);
}

TEST_CASE("http provider round trip against a local server") {
    const int dim = 8;
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        calls.fetch_add(1);
        auto body = nlohmann::json::parse(req.body);
        const std::string text = body.at("texts").at(0).get<std::string>();
        // toy embedding: normalized character histogram over 8 buckets
        std::vector<double> v(dim, 0.0);
        for (char c : text) v[static_cast<std::size_t>(static_cast<unsigned char>(c) % dim)] += 1.0;
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        nlohmann::json out;
        out["embeddings"] = {v};
        res.set_content(out.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&]() { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpProviderConfig config;
    config.url = "http://127.0.0.1:" + std::to_string(port) + "/embed";
    config.dimension = dim;
    auto provider = std::make_shared<HttpEmbeddingProvider>(config);
    GoldenLibrary lib(provider);
    lib.add_case(context_of("hello world", "caption"), sample_plan(0));
    lib.add_case(context_of("another text", "caption"), sample_plan(1));
    auto hits = lib.retrieve(context_of("hello world", "caption"), 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].entry->id == 0);
    CHECK(calls.load() >= 3);

    server.stop();
    serving.join();

    // server gone: provider failure is retriable
    try {
        provider->embed("x");
        FAIL("expected a provider error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Provider);
        CHECK(e.retriable());
    }
}
