#pragma once

#include <string>
#include <vector>

#include "setplan/candidate_set.hpp"
#include "setplan/error.hpp"

namespace setplan::core {

using setplan::CandidateSet;
using setplan::ImageId;

enum class Polarity { Positive, Negative };

inline const char* polarity_name(Polarity p) {
    return p == Polarity::Positive ? "positive" : "negative";
}
Polarity parse_polarity(const std::string& s);

// One invocation of one tool with one rewritten query, one polarity and
// one top-k cutoff. `ranking` is the top-k prefix in rank order; `results`
// is the same slice as a set.
struct AtomicRetrieval {
    int id = 0;
    std::string tool;
    std::string query;
    Polarity polarity = Polarity::Positive;
    int k = 0;
    std::vector<ImageId> ranking;
    CandidateSet results;
};

// Retrievals identical except for k; result sets are nested prefixes of
// one base ranking, members ordered by ascending k.
struct Family {
    std::string tool;
    std::string query;
    Polarity polarity = Polarity::Positive;
    std::vector<int> member_ids;
};

struct Instance {
    int gallery_size = 0;
    CandidateSet ground_truth;
    std::vector<AtomicRetrieval> pool;
    std::string query_text;
    std::string caption;

    CandidateSet non_ground_truth() const { return ground_truth.complement(); }

    // Checks every structural invariant: non-empty ground truth, ids in
    // range, |results| <= k, ranking/set agreement, family nesting.
    void validate() const;
};

struct PositiveEntry {
    int pool_index = 0;    // into Instance::pool
    int retrieval_id = 0;  // AtomicRetrieval::id
    int tool_index = 0;    // into IncidenceData::tools
};

struct IncidenceData {
    int gallery_size = 0;
    CandidateSet ground_truth;

    std::vector<PositiveEntry> positives;  // positive retrievals, pool order
    std::vector<int> negative_pool;        // pool indices of negatives

    // Per positive retrieval (parallel to positives):
    // gt_hits[r] = S_r intersect I+, noise_hits[r] = S_r intersect I-.
    std::vector<CandidateSet> gt_hits;
    std::vector<CandidateSet> noise_hits;

    // Row sums over the gallery: gt_degree[i] counts positive retrievals
    // hitting ground-truth image i; noise_degree[i] the analogue on I-.
    std::vector<int> gt_degree;
    std::vector<int> noise_degree;

    std::vector<Family> families;        // all polarities
    std::vector<std::string> tools;      // distinct, sorted

    bool a(ImageId i, int r) const { return gt_hits[static_cast<std::size_t>(r)].contains(i); }
    bool b(ImageId i, int r) const { return noise_hits[static_cast<std::size_t>(r)].contains(i); }
};

// Prefix-slices a base ranking at each level of a strictly increasing
// truncation grid. Levels beyond the ranking length saturate.
std::vector<CandidateSet> slice_truncations(int gallery_size,
                                            const std::vector<ImageId>& base_ranking,
                                            const std::vector<int>& grid);

// Builds the incidence structure consumed by the optimizers. Pure function
// of the instance.
IncidenceData build_incidence(const Instance& instance);

// Families restricted to one polarity, preserving order.
std::vector<Family> families_of(const IncidenceData& inc, Polarity p);

inline std::vector<int> default_truncation_grid() {
    return {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
}

}  // namespace setplan::core
