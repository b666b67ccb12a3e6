#include "setplan/ablation.hpp"

#include <cstdio>
#include <sstream>

namespace setplan::eval {

setops::StepList apply_variant(const setops::StepList& steps, AblationVariant variant) {
    if (variant == AblationVariant::Full || variant == AblationVariant::NoDemos) return steps;
    setops::StepList out;
    for (const auto& step : steps.steps) {
        setops::Step s = step;
        if (s.op == setops::SetOp::Difference) {
            // Keep the name, drop the subtraction.
            s.op = setops::SetOp::Union;
            s.operands = {step.operands.front()};
        } else if (variant == AblationVariant::UnionOnly && s.op == setops::SetOp::Intersect) {
            s.op = setops::SetOp::Union;
        }
        out.steps.push_back(std::move(s));
    }
    return out;
}

VariantMetrics run_ablation(const std::vector<core::Instance>& instances,
                            AblationVariant variant, const pipeline::PipelineConfig& config) {
    VariantMetrics vm;
    vm.variant = variant;
    vm.mean_f1 = Rational(0);

    std::vector<Ranking> rankings;
    std::vector<CandidateSet> gts;
    Rational f1_sum(0);

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const core::Instance& instance = instances[i];
        plan::PlanDescriptor descriptor;
        if (variant == AblationVariant::NoDemos) {
            descriptor = pipeline::make_naive_plan(instance);
        } else {
            pipeline::Trajectory t =
                pipeline::solve_instance(config, instance, static_cast<int>(i));
            if (t.status != "ok" || !t.plan) {
                // Degenerate instance: fall back to the naive union so the
                // variant comparison stays aligned across rows.
                descriptor = pipeline::make_naive_plan(instance);
            } else {
                descriptor = *t.plan;
            }
        }
        descriptor.steps = apply_variant(descriptor.steps, variant);
        pipeline::ReplayOutcome outcome = pipeline::execute_plan(descriptor, instance);

        rankings.push_back(outcome.ranking);
        gts.push_back(instance.ground_truth);
        f1_sum += f1_score(outcome.final_set, instance.ground_truth);
        ++vm.instances;
    }
    if (vm.instances == 0) return vm;

    vm.mean_f1 = f1_sum / Rational(vm.instances);
    for (int k : config.recall_cutoffs) {
        Rational sum(0);
        for (std::size_t q = 0; q < rankings.size(); ++q)
            sum += recall_at_k(rankings[q], gts[q], k);
        vm.recall.push_back({k, sum / Rational(vm.instances)});
    }
    for (int k : config.map_cutoffs) vm.map.push_back({k, map_at_k(rankings, gts, k)});
    for (int k : config.ndcg_cutoffs) {
        double sum = 0.0;
        for (std::size_t q = 0; q < rankings.size(); ++q)
            sum += ndcg_at_k(rankings[q], gts[q], k);
        vm.ndcg.push_back({k, sum / vm.instances});
    }
    return vm;
}

std::string format_ablation_report(const std::vector<VariantMetrics>& rows,
                                   const pipeline::PipelineConfig& config) {
    std::ostringstream out;
    out << "# ablation report (" << pipeline::kCodeVersion << ")\n";
    out << "# config: " << config.to_json() << "\n";
    out << "variant\tinstances\tmean_f1";
    if (!rows.empty()) {
        for (const auto& [k, v] : rows.front().recall) out << "\trecall@" << k;
        for (const auto& [k, v] : rows.front().map) out << "\tmap@" << k;
        for (const auto& [k, v] : rows.front().ndcg) out << "\tndcg@" << k;
    }
    out << "\n";
    char buf[32];
    auto fixed = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };
    for (const auto& row : rows) {
        out << ablation_variant_name(row.variant) << "\t" << row.instances << "\t"
            << fixed(row.mean_f1.to_double());
        for (const auto& [k, v] : row.recall) out << "\t" << fixed(v.to_double());
        for (const auto& [k, v] : row.map) out << "\t" << fixed(v.to_double());
        for (const auto& [k, v] : row.ndcg) out << "\t" << fixed(v);
        out << "\n";
    }
    return out.str();
}

}  // namespace setplan::eval
