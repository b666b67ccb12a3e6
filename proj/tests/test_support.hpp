#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here recomputes expectations from first principles (sets, formulas,
// enumeration) without touching the solver paths under test.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "setplan/bip.hpp"
#include "setplan/core.hpp"
#include "setplan/rng.hpp"
#include "setplan/stage1.hpp"
#include "setplan/stage2.hpp"

namespace testsupport {

using setplan::CandidateSet;
using setplan::ImageId;
using setplan::Rational;
using setplan::core::AtomicRetrieval;
using setplan::core::Instance;
using setplan::core::Polarity;
using setplan::synth::CounterRng;

inline AtomicRetrieval make_retrieval(int id, const std::string& tool, const std::string& query,
                                      Polarity polarity, int k, int gallery,
                                      const std::vector<ImageId>& ranking) {
    AtomicRetrieval r;
    r.id = id;
    r.tool = tool;
    r.query = query;
    r.polarity = polarity;
    r.k = k;
    r.ranking = ranking;
    r.results = CandidateSet(gallery);
    for (ImageId i : ranking) r.results.insert(i);
    return r;
}

inline Instance make_instance(int gallery, const std::vector<ImageId>& gt,
                              std::vector<AtomicRetrieval> pool) {
    Instance instance;
    instance.gallery_size = gallery;
    instance.ground_truth = CandidateSet(gallery);
    for (ImageId i : gt) instance.ground_truth.insert(i);
    instance.pool = std::move(pool);
    instance.query_text = "fixture query";
    instance.caption = "fixture caption";
    return instance;
}

// Set-level score of a stage-1 selection, straight from the objective
// definition. Selecting extra nested family members never helps, so the
// maximum over all subsets equals the family-constrained maximum.
inline Rational stage1_selection_score(const Instance& instance,
                                       const std::vector<const AtomicRetrieval*>& selected,
                                       const setplan::stage1::Stage1Weights& weights) {
    CandidateSet covered(instance.gallery_size);
    std::set<std::string> tools;
    for (const auto* r : selected) {
        covered |= r->results;
        tools.insert(r->tool);
    }
    const int gt_count = instance.ground_truth.count();
    const int noise_total = instance.gallery_size - gt_count;
    const int covered_gt = covered.intersect_count(instance.ground_truth);
    const int covered_noise = covered.count() - covered_gt;
    Rational score = weights.recall_weight * Rational(covered_gt) / Rational(gt_count);
    if (noise_total > 0)
        score -= weights.noise_weight * Rational(covered_noise) / Rational(noise_total);
    score += weights.diversity_weight * Rational(static_cast<std::int64_t>(tools.size()));
    return score;
}

// Exhaustive set-level oracle for stage 1 over all positive subsets.
inline Rational stage1_oracle(const Instance& instance,
                              const setplan::stage1::Stage1Weights& weights) {
    std::vector<const AtomicRetrieval*> positives;
    for (const auto& r : instance.pool) {
        if (r.polarity == Polarity::Positive) positives.push_back(&r);
    }
    const int n = static_cast<int>(positives.size());
    Rational best(0);
    bool first = true;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<const AtomicRetrieval*> sel;
        for (int j = 0; j < n; ++j) {
            if (mask & (1u << j)) sel.push_back(positives[static_cast<std::size_t>(j)]);
        }
        Rational score = stage1_selection_score(instance, sel, weights);
        if (first || score > best) {
            best = score;
            first = false;
        }
    }
    return best;
}

// Exhaustive two-clause oracle: every non-empty positive subset crossed
// with every negative subset, scored directly on the evaluated sets.
inline Rational stage2_oracle(const CandidateSet& universe, const CandidateSet& ground_truth,
                              const std::vector<CandidateSet>& positives,
                              const std::vector<CandidateSet>& negatives,
                              const setplan::stage2::Stage2Weights& weights) {
    const int np = static_cast<int>(positives.size());
    const int nn = static_cast<int>(negatives.size());
    Rational best(0);
    bool first = true;
    for (std::uint32_t pm = 1; pm < (1u << np); ++pm) {
        CandidateSet pos_union(universe.universe_size());
        for (int j = 0; j < np; ++j) {
            if (pm & (1u << j)) pos_union |= positives[static_cast<std::size_t>(j)];
        }
        for (std::uint32_t nm = 0; nm < (1u << nn); ++nm) {
            CandidateSet final_set = pos_union;
            if (nm != 0) {
                CandidateSet cut = universe;
                for (int j = 0; j < nn; ++j) {
                    if (nm & (1u << j)) cut &= negatives[static_cast<std::size_t>(j)];
                }
                final_set -= cut;
            }
            Rational score = setplan::stage2::score_two_clause(final_set, ground_truth, weights);
            if (first || score > best) {
                best = score;
                first = false;
            }
        }
    }
    return best;
}

// Independent metric recomputations, written from the formulas.
inline double naive_recall(const std::vector<ImageId>& ranking, const std::set<ImageId>& gt,
                           int k) {
    int hits = 0;
    for (int r = 0; r < std::min<int>(k, static_cast<int>(ranking.size())); ++r)
        if (gt.count(ranking[static_cast<std::size_t>(r)])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

inline double naive_ap(const std::vector<ImageId>& ranking, const std::set<ImageId>& gt, int k) {
    double ap = 0.0;
    int hits = 0;
    for (int r = 0; r < std::min<int>(k, static_cast<int>(ranking.size())); ++r) {
        if (gt.count(ranking[static_cast<std::size_t>(r)])) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return ap / static_cast<double>(std::min<std::size_t>(gt.size(), static_cast<std::size_t>(k)));
}

inline double naive_ndcg(const std::vector<ImageId>& ranking, const std::set<ImageId>& gt, int k) {
    double dcg = 0.0;
    for (int r = 0; r < std::min<int>(k, static_cast<int>(ranking.size())); ++r) {
        if (gt.count(ranking[static_cast<std::size_t>(r)]))
            dcg += std::log(2.0) / std::log(static_cast<double>(r + 2));
    }
    double idcg = 0.0;
    for (int r = 0; r < std::min<int>(k, static_cast<int>(gt.size())); ++r)
        idcg += std::log(2.0) / std::log(static_cast<double>(r + 2));
    return dcg / idcg;
}

// Random well-formed 0-1 programs for solver cross-checks.
inline setplan::bip::BinaryProgram random_program(CounterRng& rng, int num_vars,
                                                  int num_constraints) {
    using namespace setplan::bip;
    BinaryProgram prog;
    for (int v = 0; v < num_vars; ++v) prog.add_variable("v" + std::to_string(v));
    for (int v = 0; v < num_vars; ++v) {
        std::int64_t num = rng.next_int(-9, 9);
        std::int64_t den = rng.next_int(1, 4);
        prog.set_objective(v, Rational(num, den));
    }
    for (int c = 0; c < num_constraints; ++c) {
        Constraint row;
        row.name = "r" + std::to_string(c);
        for (int v = 0; v < num_vars; ++v) {
            if (rng.bernoulli(0.4)) {
                std::int64_t coeff = rng.next_int(-3, 3);
                if (coeff != 0) row.terms.push_back({v, Rational(coeff)});
            }
        }
        if (row.terms.empty()) continue;
        int pick = rng.next_int(0, 2);
        row.relation = pick == 0   ? Relation::LessEq
                       : pick == 1 ? Relation::GreaterEq
                                   : Relation::Equal;
        if (row.relation == Relation::Equal) {
            // Keep equalities satisfiable often: right-hand side near the
            // middle of the achievable range.
            row.rhs = Rational(rng.next_int(0, 2));
        } else {
            row.rhs = Rational(rng.next_int(-2, 4));
        }
        prog.add_constraint(std::move(row));
    }
    return prog;
}

// Small random instances for the optimizer oracles.
struct RandomInstanceOptions {
    int gallery = 60;
    int max_gt = 5;
    int max_positive = 8;
    int max_negative = 3;
    int max_k = 8;
    int tools = 3;
    bool nested_families = true;
};

inline Instance random_instance(CounterRng& rng, const RandomInstanceOptions& opt) {
    const int gallery = opt.gallery;
    const int gt_count = rng.next_int(1, opt.max_gt);
    std::set<ImageId> gt;
    while (static_cast<int>(gt.size()) < gt_count)
        gt.insert(static_cast<ImageId>(rng.next_below(static_cast<std::uint64_t>(gallery))));

    std::vector<AtomicRetrieval> pool;
    int next_id = 0;
    const int pos_families = rng.next_int(1, opt.max_positive);
    auto random_ranking = [&](bool favor_gt) {
        std::vector<ImageId> ranking;
        std::set<ImageId> seen;
        const int len = rng.next_int(1, opt.max_k);
        int guard = 0;
        while (static_cast<int>(ranking.size()) < len && guard++ < 1000) {
            ImageId id;
            if (favor_gt && rng.bernoulli(0.45) && !gt.empty()) {
                auto it = gt.begin();
                std::advance(it, static_cast<long>(rng.next_below(gt.size())));
                id = *it;
            } else {
                id = static_cast<ImageId>(rng.next_below(static_cast<std::uint64_t>(gallery)));
            }
            if (seen.insert(id).second) ranking.push_back(id);
        }
        return ranking;
    };

    for (int f = 0; f < pos_families; ++f) {
        std::vector<ImageId> ranking = random_ranking(true);
        const std::string tool = "tool" + std::to_string(rng.next_int(0, opt.tools - 1));
        const std::string query = "q" + std::to_string(f);
        if (opt.nested_families && rng.bernoulli(0.5) && ranking.size() >= 2) {
            int k1 = rng.next_int(1, static_cast<int>(ranking.size()) - 1);
            std::vector<ImageId> prefix(ranking.begin(), ranking.begin() + k1);
            pool.push_back(make_retrieval(next_id++, tool, query, Polarity::Positive, k1, gallery,
                                          prefix));
        }
        pool.push_back(make_retrieval(next_id++, tool, query, Polarity::Positive,
                                      static_cast<int>(ranking.size()), gallery, ranking));
    }
    const int neg_count = rng.next_int(0, opt.max_negative);
    for (int f = 0; f < neg_count; ++f) {
        std::vector<ImageId> ranking = random_ranking(false);
        const std::string tool = "tool" + std::to_string(rng.next_int(0, opt.tools - 1));
        const std::string query = "nq" + std::to_string(f);
        if (opt.nested_families && rng.bernoulli(0.5) && ranking.size() >= 2) {
            int k1 = rng.next_int(1, static_cast<int>(ranking.size()) - 1);
            std::vector<ImageId> prefix(ranking.begin(), ranking.begin() + k1);
            pool.push_back(
                make_retrieval(next_id++, tool, query, Polarity::Negative, k1, gallery, prefix));
        }
        pool.push_back(make_retrieval(next_id++, tool, query, Polarity::Negative,
                                      static_cast<int>(ranking.size()), gallery, ranking));
    }
    return make_instance(gallery, std::vector<ImageId>(gt.begin(), gt.end()), std::move(pool));
}

}  // namespace testsupport
