#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "setplan/core.hpp"

namespace setplan::synth {

using namespace setplan::core;

// Controls for the deterministic instance generator. Rankings are drawn
// first and sliced by the truncation grid, so family nesting holds by
// construction.
struct GeneratorConfig {
    std::uint64_t seed = 42;
    int gallery_size = 500;
    int gt_min = 3;
    int gt_max = 8;
    int tool_count = 3;
    std::vector<double> hit_rates = {0.9, 0.8, 0.7};  // per tool, cycled
    int distractor_count = 10;
    double distractor_overlap = 0.5;  // P(distractor enters a positive ranking)
    double negative_fidelity = 0.9;   // P(distractor enters a negative ranking)
    double negative_gt_leak = 0.0;    // P(a ground-truth image leaks into a negative)
    int pool_target = 40;             // atomic retrievals per instance
    int negative_every = 4;           // every Nth family is negative (0 = none)
    std::vector<int> truncation_grid = default_truncation_grid();

    // Adversarial instances plant the distractor block ahead of the
    // ground truth in every positive ranking and give each family a
    // private run of early fillers, so subtracting the distractors is
    // strictly better than any union.
    double adversarial_fraction = 0.0;
    int adversarial_early_fillers = 0;

    int cluster_count = 5;  // lexical clusters for the context texts

    void validate() const;
    std::string to_json() const;
    static GeneratorConfig from_json(const std::string& text);
    static GeneratorConfig load(const std::string& path);
};

// Deterministic for (config.seed, index); see GeneratorConfig.
Instance generate_instance(const GeneratorConfig& config, int index);

}  // namespace setplan::synth
