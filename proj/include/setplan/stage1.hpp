#pragma once

#include <string>
#include <vector>

#include "setplan/bip.hpp"
#include "setplan/core.hpp"

namespace setplan::stage1 {

using setplan::Rational;
using namespace setplan::core;

struct Stage1Weights {
    Rational recall_weight{1};        // w_R
    Rational noise_weight{1, 2};      // w_P (w_F in some formulations)
    Rational diversity_weight{1, 100};  // lambda_div

    void validate() const;
};

// Variable layout of a compiled selection model, for callers that want to
// inspect the solver assignment directly.
struct Stage1Model {
    bip::BinaryProgram program;
    std::vector<int> select_vars;            // x_r, parallel to incidence.positive_pool
    std::vector<std::pair<ImageId, int>> gt_cover_vars;     // (image, y_i)
    std::vector<std::pair<ImageId, int>> noise_cover_vars;  // (image, z_i)
    std::vector<std::pair<std::string, int>> tool_vars;     // (tool, t_f)
    int family_constraints = 0;
};

struct Stage1Solution {
    std::vector<int> selected;        // retrieval ids (pool ids), ascending
    CandidateSet universe;            // union of selected result sets
    Rational objective;
    Rational coverage;                // |U ∩ I+| / |I+|
    std::vector<std::string> active_tools;
    bool proven = true;
    std::uint64_t nodes = 0;
};

// Compiles the recall-oriented selection model: coverage indicators are
// linked to selections by two-sided bounds, one exclusivity constraint per
// family, and tool-activity links for the diversity term.
Stage1Model build_stage1_model(const IncidenceData& incidence, const Stage1Weights& weights);

Stage1Solution solve_stage1(const Instance& instance, const Stage1Weights& weights,
                            const bip::SolveLimits& limits = {});
Stage1Solution solve_stage1(const Instance& instance, const IncidenceData& incidence,
                            const Stage1Weights& weights, const bip::SolveLimits& limits = {});

}  // namespace setplan::stage1
