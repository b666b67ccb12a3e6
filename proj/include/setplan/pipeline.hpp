#pragma once

#include <optional>
#include <string>
#include <vector>

#include "setplan/dnf.hpp"
#include "setplan/eval.hpp"
#include "setplan/golden_library.hpp"
#include "setplan/plan.hpp"
#include "setplan/stage1.hpp"
#include "setplan/stage2.hpp"

namespace setplan::pipeline {

using namespace setplan::core;
using setplan::Rational;

inline constexpr const char* kCodeVersion = "setplan 0.1.0";

struct PipelineConfig {
    stage1::Stage1Weights stage1_weights;
    stage2::Stage2Weights stage2_weights;
    std::string composer = "two_clause";  // or "dnf"
    dnf::ClauseLimits clause_limits;
    int dnf_budget = 3;
    Rational dnf_complexity_penalty{1, 1000};
    // Node budget only by default: wall-clock limits would make reruns
    // depend on machine speed, and outputs must be byte-reproducible.
    bip::SolveLimits solve_limits{10'000'000, 0};
    int threads = 1;
    std::vector<int> recall_cutoffs = {1, 5, 10, 50};
    std::vector<int> map_cutoffs = {5, 10, 25, 50};
    std::vector<int> ndcg_cutoffs = {10};

    void validate() const;
    std::string to_json() const;
    static PipelineConfig from_json(const std::string& text);
};

struct Trajectory {
    int instance_index = 0;
    std::string status;  // "ok", "empty_universe" or "error"
    std::string error_kind;
    std::string error_message;
    bool budget_hit = false;

    std::string query_text;
    std::string caption;

    // Stage-1 summary.
    std::vector<int> stage1_selected;
    Rational stage1_objective;
    Rational coverage;
    std::vector<std::string> active_tools;
    int universe_size = 0;

    // Composition result.
    std::vector<int> positives;  // retrieval ids in the final plan
    std::vector<int> negatives;
    Rational stage2_objective;
    std::vector<Rational> lambda_trace;  // DNF composer only

    std::optional<plan::PlanDescriptor> plan;
    CandidateSet final_set;  // in-memory only; never serialized as ids
    Rational f1;
};

struct AggregateMetrics {
    Rational mean_f1;
    std::vector<std::pair<int, Rational>> recall;  // per cutoff
    std::vector<std::pair<int, Rational>> map;
    std::vector<std::pair<int, double>> ndcg;
};

struct RunReport {
    PipelineConfig config;
    std::vector<Trajectory> trajectories;
    AggregateMetrics metrics;
    std::vector<int> failed_instances;
    bool any_budget_hit = false;
};

// Derives the optimal trajectory for one instance: stage-1 selection, then
// the configured composer.
Trajectory solve_instance(const PipelineConfig& config, const Instance& instance, int index);

// Composition only, resuming from a stage-1 selection (retrieval ids).
Trajectory compose_instance(const PipelineConfig& config, const Instance& instance, int index,
                            const std::vector<int>& stage1_selected);

// Stage-1-only output: one record per instance with the selected ids.
std::string stage1_to_jsonl(const PipelineConfig& config,
                            const std::vector<Trajectory>& trajectories);
// Returns per-instance selected ids, indexed by instance.
std::vector<std::vector<int>> stage1_from_jsonl(const std::string& text);

// Full offline run over an instance corpus with an instance-level worker
// pool; output order follows instance ids regardless of completion order.
RunReport run_pipeline(const PipelineConfig& config, const std::vector<Instance>& instances);

// The steering-free baseline plan: the largest-k member of every positive
// family, all unioned.
plan::PlanDescriptor make_naive_plan(const Instance& instance);

struct ReplayOutcome {
    CandidateSet final_set;
    std::vector<int> used_retrievals;  // pool ids backing the plan's calls
    bool k_adjusted = false;           // some call used a nearest lower k
    eval::Ranking ranking;
};

// Executes a plan descriptor against an instance. Calls resolve by tool
// name and polarity (exact rewritten-query match preferred), then the
// nearest available k at or below the requested one. Unknown tools raise
// a reference error listing what the instance offers.
ReplayOutcome execute_plan(const plan::PlanDescriptor& plan, const Instance& instance);

// Replays a stored case on an instance and ranks the result.
ReplayOutcome replay_case(const library::Case& stored, const Instance& instance);

// Min-rank-across-selected-retrievals ordering of a final set.
eval::Ranking fallback_ranking(const Instance& instance, const std::vector<int>& retrieval_ids,
                               const CandidateSet& final_set);

AggregateMetrics compute_metrics(const PipelineConfig& config,
                                 const std::vector<Instance>& instances,
                                 const std::vector<Trajectory>& trajectories);

// Serialization: JSONL trajectories (header embeds config + version) and
// a JSON run report.
std::string trajectories_to_jsonl(const RunReport& report);
std::vector<Trajectory> trajectories_from_jsonl(const std::string& text, PipelineConfig* config);
std::string report_to_json(const RunReport& report);

}  // namespace setplan::pipeline
