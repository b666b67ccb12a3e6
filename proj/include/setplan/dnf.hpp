#pragma once

#include <vector>

#include "setplan/bip.hpp"
#include "setplan/core.hpp"
#include "setplan/stage2.hpp"

namespace setplan::dnf {

using setplan::Rational;
using namespace setplan::core;
using stage2::PoolEntry;

// One DNF clause: an intersection of literals over the candidate universe.
// A positive literal contributes S_r, a negative literal its relative
// complement U \ S_r.
struct Literal {
    int retrieval_id = 0;
    bool negated = false;
};

struct Clause {
    std::vector<Literal> literals;
    CandidateSet extension;
};

struct ClauseLimits {
    int max_len = 3;
    int max_negative = 1;
    int clause_budget = 10'000;  // refusal threshold for the enumeration
};

// Enumerates clauses with at least one positive literal, at most max_len
// literals and at most max_negative negated ones, in deterministic order
// (by length, then by literal positions). Refuses when the count would
// exceed the clause budget.
std::vector<Clause> enumerate_clauses(const CandidateSet& universe,
                                      const std::vector<PoolEntry>& positives,
                                      const std::vector<PoolEntry>& negatives,
                                      const ClauseLimits& limits);

// Exact F1 of the union of the selected clause extensions against the
// ground truth: 2 tp / (|I+| + tp + fp). Empty selections score 0.
Rational f1_of(const std::vector<int>& selection, const std::vector<Clause>& clauses,
               const CandidateSet& ground_truth);

struct DnfSolution {
    std::vector<int> selected;  // clause indices, ascending
    CandidateSet result;
    Rational f1;
    std::vector<Rational> lambda_trace;
};

// Maximizes F1 over clause selections of size <= budget by Dinkelbach
// iteration: repeatedly solve the parametric linear model at the current
// ratio, then raise the ratio to the achieved F1 until it fixes.
// `complexity_penalty` discourages long clauses (alpha = 0 disables it and
// makes the iteration exact for the fractional objective).
DnfSolution solve_f1_dnf(const std::vector<Clause>& clauses, const CandidateSet& ground_truth,
                         int budget, const Rational& complexity_penalty,
                         const bip::SolveLimits& limits = {});

}  // namespace setplan::dnf
