#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "setplan/eval.hpp"
#include "test_support.hpp"

using namespace setplan;
using namespace setplan::eval;
using testsupport::CounterRng;

namespace {

CandidateSet gt_of(int universe, std::initializer_list<ImageId> ids) {
    return CandidateSet::of(universe, ids);
}

std::pair<Ranking, std::set<ImageId>> random_case(CounterRng& rng, int universe) {
    Ranking ranking;
    std::set<ImageId> used;
    const int len = rng.next_int(1, universe);
    while (static_cast<int>(ranking.size()) < len) {
        ImageId id = static_cast<ImageId>(rng.next_below(static_cast<std::uint64_t>(universe)));
        if (used.insert(id).second) ranking.push_back(id);
    }
    std::set<ImageId> gt;
    const int gt_count = rng.next_int(1, 5);
    while (static_cast<int>(gt.size()) < gt_count)
        gt.insert(static_cast<ImageId>(rng.next_below(static_cast<std::uint64_t>(universe))));
    return {ranking, gt};
}

}  // namespace

TEST_CASE("recall basics") {
    CHECK(recall_at_k({7, 0, 3}, gt_of(10, {0}), 2) == Rational(1));
    CHECK(recall_at_k({7, 0, 3}, gt_of(10, {0}), 1) == Rational(0));
    CHECK_THROWS_AS(recall_at_k({0}, CandidateSet(10), 1), Error);
    CHECK_THROWS_AS(recall_at_k({0, 0}, gt_of(10, {0}), 1), Error);
}

TEST_CASE("recall is non-decreasing in k") {
    CounterRng rng(21, 0, 0);
    for (int trial = 0; trial < 20; ++trial) {
        auto [ranking, gt] = random_case(rng, 30);
        CandidateSet gtset(30);
        for (ImageId i : gt) gtset.insert(i);
        Rational prev(0);
        for (int k = 1; k <= 30; ++k) {
            Rational cur = recall_at_k(ranking, gtset, k);
            CHECK(prev <= cur);
            prev = cur;
        }
    }
}

TEST_CASE("mAP closed form: hits at ranks 1 and 3") {
    // AP@5 = (1/1 + 2/3) / 2 = 5/6
    Ranking ranking = {4, 9, 5, 8, 7};
    CandidateSet gt = gt_of(12, {4, 5});
    CHECK(map_at_k({ranking}, {gt}, 5) == Rational(5, 6));
}

TEST_CASE("perfect ranking has mAP 1") {
    Ranking ranking = {1, 2, 3};
    CandidateSet gt = gt_of(6, {1, 2, 3});
    CHECK(map_at_k({ranking}, {gt}, 5) == Rational(1));
}

TEST_CASE("metrics agree with naive reimplementations") {
    CounterRng rng(22, 0, 0);
    std::vector<Ranking> rankings;
    std::vector<CandidateSet> gts;
    for (int trial = 0; trial < 200; ++trial) {
        auto [ranking, gt] = random_case(rng, 25);
        CandidateSet gtset(25);
        for (ImageId i : gt) gtset.insert(i);
        for (int k : {1, 3, 10, 25}) {
            Rational recall = recall_at_k(ranking, gtset, k);
            Rational ap = map_at_k({ranking}, {gtset}, k);
            double ndcg = ndcg_at_k(ranking, gtset, k);
            CHECK(std::abs(recall.to_double() - testsupport::naive_recall(ranking, gt, k)) <
                  1e-12);
            CHECK(std::abs(ap.to_double() - testsupport::naive_ap(ranking, gt, k)) < 1e-12);
            CHECK(std::abs(ndcg - testsupport::naive_ndcg(ranking, gt, k)) < 1e-12);
            CHECK((Rational(0) <= recall && recall <= Rational(1)));
            CHECK((Rational(0) <= ap && ap <= Rational(1)));
            CHECK((0.0 <= ndcg && ndcg <= 1.0));
        }
        rankings.push_back(ranking);
        gts.push_back(gtset);
    }
    // batch mAP is the mean of per-query APs
    double mean_ap = 0.0;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        std::set<ImageId> gt;
        gts[q].for_each([&](ImageId i) { gt.insert(i); });
        mean_ap += testsupport::naive_ap(rankings[q], gt, 10);
    }
    mean_ap /= static_cast<double>(rankings.size());
    CHECK(std::abs(map_at_k(rankings, gts, 10).to_double() - mean_ap) < 1e-12);
}

TEST_CASE("NDCG closed forms") {
    CHECK(ndcg_at_k({3}, gt_of(8, {3}), 1) == 1.0);
    // single ground truth at rank 2
    double got = ndcg_at_k({5, 3}, gt_of(8, {3}), 10);
    CHECK(got == 1.0 / std::log2(3.0));
    CHECK(got == doctest::Approx(0.6309).epsilon(1e-4));
}

TEST_CASE("NDCG ignores order below the last hit") {
    CandidateSet gt = gt_of(20, {4});
    Ranking a = {9, 4, 1, 2, 3};
    Ranking b = {9, 4, 3, 2, 1};
    CHECK(ndcg_at_k(a, gt, 5) == ndcg_at_k(b, gt, 5));
}

TEST_CASE("relevance score basics") {
    CHECK(relevance_score(2.5, 2.5) == 0.5);
    CHECK(relevance_score(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-12));
    double tiny = relevance_score(-709.0, 0.0);
    CHECK(tiny > 0.0);
    CHECK(tiny < 1e-300);
    CHECK(std::isfinite(tiny));
    CHECK_THROWS_AS(relevance_score(std::nan(""), 0.0), Error);
    CHECK_THROWS_AS(relevance_score(0.0, INFINITY), Error);
}

TEST_CASE("relevance score complement identity") {
    CounterRng rng(23, 0, 0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = (rng.next_double() - 0.5) * 200.0;
        double b = (rng.next_double() - 0.5) * 200.0;
        CHECK(std::abs(relevance_score(a, b) + relevance_score(b, a) - 1.0) < 1e-12);
    }
}

TEST_CASE("rank_final_set orders by score then fallback") {
    CandidateSet final_set = CandidateSet::of(10, {1, 2, 3, 4});
    std::map<ImageId, double> scores = {{1, 0.9}, {2, 0.2}};
    std::map<ImageId, int> fallback = {{3, 3}, {4, 1}, {1, 9}, {2, 9}};
    Ranking got = rank_final_set(final_set, scores, fallback);
    CHECK(got == Ranking{1, 2, 4, 3});

    // no scores: pure fallback ordering
    CHECK(rank_final_set(final_set, {}, fallback) == Ranking{4, 3, 1, 2});

    std::map<ImageId, int> missing = {{3, 1}};
    CHECK_THROWS_AS(rank_final_set(final_set, {}, missing), Error);
}

TEST_CASE("rank_final_set is stable under input permutation") {
    CounterRng rng(24, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        CandidateSet final_set(40);
        std::map<ImageId, double> scores;
        std::map<ImageId, int> fallback;
        for (int i = 0; i < 40; ++i) {
            if (!rng.bernoulli(0.5)) continue;
            final_set.insert(i);
            if (rng.bernoulli(0.5)) scores[i] = rng.next_double();
            fallback[i] = rng.next_int(0, 5);
        }
        if (final_set.empty()) continue;
        Ranking first = rank_final_set(final_set, scores, fallback);
        // maps iterate in key order already; rebuild in reverse insertion
        std::map<ImageId, double> scores2(scores.begin(), scores.end());
        std::map<ImageId, int> fallback2(fallback.begin(), fallback.end());
        CHECK(rank_final_set(final_set, scores2, fallback2) == first);
    }
}
