#pragma once

#include <map>
#include <string>
#include <vector>

#include "setplan/candidate_set.hpp"
#include "setplan/rational.hpp"

namespace setplan::eval {

using setplan::CandidateSet;
using setplan::ImageId;
using setplan::Rational;

// Descending-relevance ordering with no duplicates.
using Ranking = std::vector<ImageId>;

enum class AblationVariant { Full, NoDiff, UnionOnly, NoDemos };

const char* ablation_variant_name(AblationVariant v);
AblationVariant parse_ablation_variant(const std::string& s);

// |top-k ∩ gt| / |gt|.
Rational recall_at_k(const Ranking& ranking, const CandidateSet& ground_truth, int k);

// Mean over the batch of AP@k, where AP@k sums precision at each hit rank
// <= k and normalizes by min(|gt|, k) — the convention of the benchmark's
// official evaluator.
Rational map_at_k(const std::vector<Ranking>& rankings,
                  const std::vector<CandidateSet>& ground_truths, int k);

// Binary-relevance NDCG@k with gain 1 at ground-truth positions and the
// 1/log2(rank+1) discount.
double ndcg_at_k(const Ranking& ranking, const CandidateSet& ground_truth, int k);

// Verifier relevance score sigma(z_yes - z_no), numerically stable for
// gaps up to the hundreds.
double relevance_score(double z_yes, double z_no);

// 2 tp / (|gt| + |final|): the harmonic precision/recall mean on sets.
Rational f1_score(const CandidateSet& final_set, const CandidateSet& ground_truth);

// Orders the final set: verifier-scored members first (descending score,
// ties by ascending id); unscored members follow in fallback order
// (ascending value, ties by ascending id). Every member must appear in at
// least one of the maps.
Ranking rank_final_set(const CandidateSet& final_set, const std::map<ImageId, double>& scores,
                       const std::map<ImageId, int>& fallback_order);

}  // namespace setplan::eval
