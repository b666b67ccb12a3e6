#include "setplan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "setplan/error.hpp"

namespace setplan::eval {

const char* ablation_variant_name(AblationVariant v) {
    switch (v) {
        case AblationVariant::Full: return "full";
        case AblationVariant::NoDiff: return "no_diff";
        case AblationVariant::UnionOnly: return "union_only";
        case AblationVariant::NoDemos: return "no_demos";
    }
    return "?";
}

AblationVariant parse_ablation_variant(const std::string& s) {
    if (s == "full") return AblationVariant::Full;
    if (s == "no_diff") return AblationVariant::NoDiff;
    if (s == "union_only") return AblationVariant::UnionOnly;
    if (s == "no_demos") return AblationVariant::NoDemos;
    throw Error(ErrorKind::Config, "unknown ablation variant: " + s);
}

namespace {

void check_ranking(const Ranking& ranking) {
    std::set<ImageId> seen;
    for (ImageId id : ranking) {
        if (!seen.insert(id).second)
            throw Error(ErrorKind::Data, "ranking contains duplicate id " + std::to_string(id));
    }
}

}  // namespace

Rational recall_at_k(const Ranking& ranking, const CandidateSet& ground_truth, int k) {
    if (k < 1) throw Error(ErrorKind::Config, "recall cutoff must be at least 1");
    if (ground_truth.empty()) throw Error(ErrorKind::Data, "recall needs non-empty ground truth");
    check_ranking(ranking);
    int hits = 0;
    const int limit = std::min<int>(k, static_cast<int>(ranking.size()));
    for (int r = 0; r < limit; ++r) {
        if (ground_truth.contains(ranking[static_cast<std::size_t>(r)])) ++hits;
    }
    return Rational(hits) / Rational(ground_truth.count());
}

Rational map_at_k(const std::vector<Ranking>& rankings,
                  const std::vector<CandidateSet>& ground_truths, int k) {
    if (k < 1) throw Error(ErrorKind::Config, "mAP cutoff must be at least 1");
    if (rankings.empty()) throw Error(ErrorKind::Data, "mAP needs a non-empty batch");
    if (rankings.size() != ground_truths.size())
        throw Error(ErrorKind::Data, "mAP batch sizes disagree");

    Rational total(0);
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        const Ranking& ranking = rankings[q];
        const CandidateSet& gt = ground_truths[q];
        if (gt.empty()) throw Error(ErrorKind::Data, "mAP needs non-empty ground truth");
        check_ranking(ranking);

        Rational ap(0);
        int hits = 0;
        const int limit = std::min<int>(k, static_cast<int>(ranking.size()));
        for (int r = 0; r < limit; ++r) {
            if (gt.contains(ranking[static_cast<std::size_t>(r)])) {
                ++hits;
                ap += Rational(hits) / Rational(r + 1);
            }
        }
        total += ap / Rational(std::min(gt.count(), k));
    }
    return total / Rational(static_cast<std::int64_t>(rankings.size()));
}

double ndcg_at_k(const Ranking& ranking, const CandidateSet& ground_truth, int k) {
    if (k < 1) throw Error(ErrorKind::Config, "NDCG cutoff must be at least 1");
    if (ground_truth.empty()) throw Error(ErrorKind::Data, "NDCG needs non-empty ground truth");
    check_ranking(ranking);

    double dcg = 0.0;
    const int limit = std::min<int>(k, static_cast<int>(ranking.size()));
    for (int r = 0; r < limit; ++r) {
        if (ground_truth.contains(ranking[static_cast<std::size_t>(r)]))
            dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    double idcg = 0.0;
    const int ideal = std::min(ground_truth.count(), k);
    for (int r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r + 2));
    return dcg / idcg;
}

double relevance_score(double z_yes, double z_no) {
    if (!std::isfinite(z_yes) || !std::isfinite(z_no))
        throw Error(ErrorKind::Data, "relevance score needs finite logits");
    const double gap = z_yes - z_no;
    if (gap >= 0.0) return 1.0 / (1.0 + std::exp(-gap));
    const double e = std::exp(gap);
    return e / (1.0 + e);
}

Rational f1_score(const CandidateSet& final_set, const CandidateSet& ground_truth) {
    if (ground_truth.empty()) throw Error(ErrorKind::Data, "F1 needs non-empty ground truth");
    const int tp = final_set.intersect_count(ground_truth);
    return Rational(2 * tp) / Rational(ground_truth.count() + final_set.count());
}

Ranking rank_final_set(const CandidateSet& final_set, const std::map<ImageId, double>& scores,
                       const std::map<ImageId, int>& fallback_order) {
    struct Entry {
        ImageId id;
        bool scored;
        double score;
        int fallback;
    };
    std::vector<Entry> entries;
    final_set.for_each([&](ImageId id) {
        auto s = scores.find(id);
        auto f = fallback_order.find(id);
        if (s == scores.end() && f == fallback_order.end())
            throw Error(ErrorKind::Data,
                        "final-set member " + std::to_string(id) + " has no score and no fallback");
        entries.push_back({id, s != scores.end(), s != scores.end() ? s->second : 0.0,
                           f != fallback_order.end() ? f->second : 0});
    });
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.scored != b.scored) return a.scored;  // scored members first
        if (a.scored) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        }
        if (a.fallback != b.fallback) return a.fallback < b.fallback;
        return a.id < b.id;
    });
    Ranking out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.id);
    return out;
}

}  // namespace setplan::eval
