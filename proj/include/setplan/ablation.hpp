#pragma once

#include <string>
#include <vector>

#include "setplan/pipeline.hpp"

namespace setplan::eval {

// Per-variant metric row of the ablation table.
struct VariantMetrics {
    AblationVariant variant = AblationVariant::Full;
    Rational mean_f1;
    std::vector<std::pair<int, Rational>> recall;
    std::vector<std::pair<int, Rational>> map;
    std::vector<std::pair<int, double>> ndcg;
    int instances = 0;
};

// Rewrites a step list for a variant: no_diff short-circuits DIFFERENCE
// steps to their first operand; union_only additionally turns INTERSECT
// into UNION.
setops::StepList apply_variant(const setops::StepList& steps, AblationVariant variant);

// Runs the offline pipeline on the instances and evaluates the executed
// plans under the variant. no_demos replaces optimized plans with the
// naive all-positive union.
VariantMetrics run_ablation(const std::vector<core::Instance>& instances,
                            AblationVariant variant, const pipeline::PipelineConfig& config);

// Delimited ablation table, one row per variant.
std::string format_ablation_report(const std::vector<VariantMetrics>& rows,
                                   const pipeline::PipelineConfig& config);

}  // namespace setplan::eval
