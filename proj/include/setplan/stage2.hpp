#pragma once

#include <map>
#include <string>
#include <vector>

#include "setplan/bip.hpp"
#include "setplan/core.hpp"
#include "setplan/stage1.hpp"

namespace setplan::stage2 {

using setplan::Rational;
using namespace setplan::core;

struct Stage2Weights {
    Rational noise_penalty{1, 10};  // lambda_reg; 0 recovers the unpenalized objective

    void validate() const;
};

// The fixed two-clause composition: union of selected positives minus the
// intersection of selected negatives. An empty negative selection excludes
// nothing (the intersection over no sets is taken as empty).
struct TwoClausePlan {
    std::vector<int> positives;  // retrieval ids, non-empty when status is Ok
    std::vector<int> negatives;  // retrieval ids, possibly empty
    CandidateSet final_set;
};

enum class Stage2Status { Ok, EmptyUniverse };

struct Stage2Solution {
    Stage2Status status = Stage2Status::Ok;
    TwoClausePlan plan;
    Rational objective;
    bool proven = true;
    std::uint64_t nodes = 0;
};

struct Stage2Model {
    bip::BinaryProgram program;
    std::vector<int> positive_vars;                       // x_r
    std::vector<int> negative_vars;                       // w_r
    std::vector<std::pair<ImageId, int>> final_vars;      // (image in U, e_i)
    std::vector<std::pair<ImageId, int>> negint_vars;     // (image in U, g_i)
};

// Pool entry for the composition stage: a retrieval id plus its result set
// already intersected with the candidate universe.
struct PoolEntry {
    int retrieval_id = 0;
    CandidateSet in_universe;
};

// Compiles the two-clause composition model over the candidate universe.
// Inclusion (e) and negative-intersection (g) indicators are forced to
// equal their set-theoretic values in any feasible assignment.
Stage2Model build_stage2_model(const CandidateSet& universe, const CandidateSet& ground_truth,
                               const std::vector<PoolEntry>& positives,
                               const std::vector<PoolEntry>& negatives,
                               const Stage2Weights& weights);

Stage2Solution solve_stage2(const Instance& instance, const stage1::Stage1Solution& stage1,
                            const std::vector<int>& negatives_pool, const Stage2Weights& weights,
                            const bip::SolveLimits& limits = {});

// Exact evaluation of a two-clause plan against resolvable result sets.
CandidateSet evaluate_two_clause(const TwoClausePlan& plan,
                                 const std::map<int, CandidateSet>& sets);

// Direct set-level score of a two-clause choice: |final ∩ I+| minus the
// penalty times |final ∩ I-|.
Rational score_two_clause(const CandidateSet& final_set, const CandidateSet& ground_truth,
                          const Stage2Weights& weights);

}  // namespace setplan::stage2
