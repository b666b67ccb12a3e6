#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "setplan/core.hpp"
#include "setplan/instance_io.hpp"
#include "test_support.hpp"

using namespace setplan;
using namespace setplan::core;
using namespace testsupport;

TEST_CASE("candidate set algebra") {
    CandidateSet a = CandidateSet::of(10, {1, 2, 5});
    CandidateSet b = CandidateSet::of(10, {2, 5, 7});
    CHECK((a | b) == CandidateSet::of(10, {1, 2, 5, 7}));
    CHECK((a & b) == CandidateSet::of(10, {2, 5}));
    CHECK((a - b) == CandidateSet::of(10, {1}));
    CHECK(a.complement().count() == 7);
    CHECK((a & b).subset_of(a));
    CHECK(a.intersect_count(b) == 2);
    CHECK_THROWS_AS(a.insert(10), Error);
    CHECK_THROWS_AS(a | CandidateSet(5), Error);
}

TEST_CASE("slice_truncations produces nested prefixes") {
    auto sets = slice_truncations(10, {3, 1, 4}, {1, 2, 3});
    REQUIRE(sets.size() == 3);
    CHECK(sets[0] == CandidateSet::of(10, {3}));
    CHECK(sets[1] == CandidateSet::of(10, {3, 1}));
    CHECK(sets[2] == CandidateSet::of(10, {3, 1, 4}));
}

TEST_CASE("slice_truncations on the default grid") {
    std::vector<ImageId> ranking;
    for (int i = 0; i < 50; ++i) ranking.push_back(i * 2);
    auto sets = slice_truncations(100, ranking, default_truncation_grid());
    REQUIRE(sets.size() == 10);
    for (int j = 0; j < 10; ++j) {
        CHECK(sets[static_cast<std::size_t>(j)].count() == (j + 1) * 5);
        if (j > 0)
            CHECK(sets[static_cast<std::size_t>(j - 1)].subset_of(
                sets[static_cast<std::size_t>(j)]));
    }
}

TEST_CASE("slice_truncations saturates beyond the ranking") {
    auto sets = slice_truncations(10, {7}, {5, 10});
    REQUIRE(sets.size() == 2);
    CHECK(sets[0] == CandidateSet::of(10, {7}));
    CHECK(sets[1] == CandidateSet::of(10, {7}));
}

TEST_CASE("slice_truncations rejects bad input") {
    CHECK_THROWS_AS(slice_truncations(10, {1}, {3, 3}), Error);
    CHECK_THROWS_AS(slice_truncations(10, {1}, {5, 2}), Error);
    CHECK_THROWS_AS(slice_truncations(10, {1, 1}, {2}), Error);
}

TEST_CASE("build_incidence matches the definitions") {
    // I+ = {0}, one positive retrieval S = {0, 1}
    Instance instance = make_instance(
        4, {0},
        {make_retrieval(0, "toolA", "q", Polarity::Positive, 2, 4, {0, 1})});
    IncidenceData inc = build_incidence(instance);
    REQUIRE(inc.positives.size() == 1);
    CHECK(inc.a(0, 0));
    CHECK_FALSE(inc.a(1, 0));
    CHECK(inc.b(1, 0));
    CHECK(inc.gt_degree[0] == 1);
    CHECK(inc.noise_degree[1] == 1);
    CHECK(inc.noise_degree[0] == 0);
}

TEST_CASE("families group by tool, query and polarity") {
    Instance instance = make_instance(
        8, {0},
        {make_retrieval(0, "toolA", "q", Polarity::Positive, 5, 8, {0, 1}),
         make_retrieval(1, "toolA", "q", Polarity::Positive, 10, 8, {0, 1, 2}),
         make_retrieval(2, "toolA", "other", Polarity::Positive, 5, 8, {3})});
    IncidenceData inc = build_incidence(instance);
    REQUIRE(inc.families.size() == 2);
    CHECK(inc.families[0].member_ids == std::vector<int>{0, 1});
    CHECK(inc.families[1].member_ids == std::vector<int>{2});
    CHECK(inc.tools == std::vector<std::string>{"toolA"});
}

TEST_CASE("incidence row sums equal a naive recount") {
    CounterRng rng(7, 0, 0);
    for (int trial = 0; trial < 20; ++trial) {
        CounterRng t(7, static_cast<std::uint64_t>(trial), 1);
        Instance instance = random_instance(t, {});
        IncidenceData inc = build_incidence(instance);

        std::vector<int> gt_degree(static_cast<std::size_t>(instance.gallery_size), 0);
        std::vector<int> noise_degree(static_cast<std::size_t>(instance.gallery_size), 0);
        for (const auto& r : instance.pool) {
            if (r.polarity != Polarity::Positive) continue;
            for (ImageId i = 0; i < instance.gallery_size; ++i) {
                if (!r.results.contains(i)) continue;
                if (instance.ground_truth.contains(i))
                    gt_degree[static_cast<std::size_t>(i)]++;
                else
                    noise_degree[static_cast<std::size_t>(i)]++;
            }
        }
        CHECK(inc.gt_degree == gt_degree);
        CHECK(inc.noise_degree == noise_degree);

        // Incidence soundness: a and b never overlap and a implies gt.
        for (std::size_t r = 0; r < inc.positives.size(); ++r) {
            CHECK_FALSE(inc.gt_hits[r].intersects(inc.noise_hits[r]));
            CHECK(inc.gt_hits[r].subset_of(instance.ground_truth));
        }
    }
}

TEST_CASE("build_incidence is deterministic") {
    CounterRng rng(11, 3, 2);
    Instance instance = random_instance(rng, {});
    IncidenceData a = build_incidence(instance);
    IncidenceData b = build_incidence(instance);
    CHECK(a.gt_degree == b.gt_degree);
    CHECK(a.noise_degree == b.noise_degree);
    CHECK(a.tools == b.tools);
    REQUIRE(a.families.size() == b.families.size());
    for (std::size_t f = 0; f < a.families.size(); ++f)
        CHECK(a.families[f].member_ids == b.families[f].member_ids);
}

TEST_CASE("instance validation catches structural damage") {
    CHECK_THROWS_AS(make_instance(4, {}, {}).validate(), Error);

    Instance outside = make_instance(4, {0}, {});
    AtomicRetrieval bad;
    bad.id = 0;
    bad.tool = "t";
    bad.query = "q";
    bad.k = 2;
    bad.ranking = {1};
    bad.results = CandidateSet(8);  // wrong universe
    bad.results.insert(1);
    outside.pool.push_back(bad);
    CHECK_THROWS_AS(outside.validate(), Error);

    // nesting violation within a family
    Instance broken = make_instance(
        6, {0},
        {make_retrieval(0, "t", "q", Polarity::Positive, 1, 6, {2}),
         make_retrieval(1, "t", "q", Polarity::Positive, 3, 6, {0, 1, 3})});
    CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("instance file round trip") {
    CounterRng rng(5, 9, 4);
    Instance instance = random_instance(rng, {});
    std::string text = serialize_instance(instance);
    Instance reloaded = parse_instance(text);
    CHECK(reloaded.gallery_size == instance.gallery_size);
    CHECK(reloaded.ground_truth == instance.ground_truth);
    CHECK(reloaded.query_text == instance.query_text);
    REQUIRE(reloaded.pool.size() == instance.pool.size());
    for (std::size_t i = 0; i < instance.pool.size(); ++i) {
        CHECK(reloaded.pool[i].results == instance.pool[i].results);
        CHECK(reloaded.pool[i].ranking == instance.pool[i].ranking);
        CHECK(reloaded.pool[i].tool == instance.pool[i].tool);
    }
    CHECK(serialize_instance(reloaded) == text);
}

TEST_CASE("instance parser requires header and version") {
    CHECK_THROWS_AS(parse_instance("{\"record\":\"retrieval\"}\n"), Error);
    CHECK_THROWS_AS(
        parse_instance("{\"record\":\"header\",\"kind\":\"instance\",\"gallery_size\":4,"
                       "\"ground_truth\":[0],\"query_text\":\"\",\"caption\":\"\"}\n"),
        Error);
    CHECK_THROWS_AS(parse_instance("not json\n"), Error);
}
