#include "setplan/core.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace setplan::core {

Polarity parse_polarity(const std::string& s) {
    if (s == "positive") return Polarity::Positive;
    if (s == "negative") return Polarity::Negative;
    throw Error(ErrorKind::Data, "unknown polarity: " + s);
}

std::vector<CandidateSet> slice_truncations(int gallery_size,
                                            const std::vector<ImageId>& base_ranking,
                                            const std::vector<int>& grid) {
    for (std::size_t j = 1; j < grid.size(); ++j) {
        if (grid[j] <= grid[j - 1])
            throw Error(ErrorKind::Config, "truncation grid must be strictly increasing");
    }
    if (!grid.empty() && grid.front() <= 0)
        throw Error(ErrorKind::Config, "truncation levels must be positive");

    CandidateSet seen(gallery_size);
    for (ImageId id : base_ranking) {
        if (seen.contains(id))
            throw Error(ErrorKind::Data, "duplicate id in ranking: " + std::to_string(id));
        seen.insert(id);
    }

    std::vector<CandidateSet> out;
    out.reserve(grid.size());
    CandidateSet prefix(gallery_size);
    std::size_t pos = 0;
    for (int k : grid) {
        std::size_t stop = std::min(base_ranking.size(), static_cast<std::size_t>(k));
        for (; pos < stop; ++pos) prefix.insert(base_ranking[pos]);
        out.push_back(prefix);
    }
    return out;
}

void Instance::validate() const {
    if (gallery_size <= 0) throw Error(ErrorKind::Data, "gallery is empty");
    if (ground_truth.universe_size() != gallery_size)
        throw Error(ErrorKind::Data, "ground truth universe mismatch");
    if (ground_truth.empty()) throw Error(ErrorKind::Data, "ground truth is empty");

    std::set<int> ids;
    for (const auto& r : pool) {
        if (!ids.insert(r.id).second)
            throw Error(ErrorKind::Data, "duplicate retrieval id: " + std::to_string(r.id));
        if (r.k <= 0)
            throw Error(ErrorKind::Data, "retrieval k must be positive");
        if (r.results.universe_size() != gallery_size)
            throw Error(ErrorKind::Data, "retrieval results outside gallery universe");
        if (r.results.count() > r.k)
            throw Error(ErrorKind::Data, "retrieval holds more than k results");
        if (static_cast<int>(r.ranking.size()) != r.results.count())
            throw Error(ErrorKind::Data, "retrieval ranking and result set disagree");
        CandidateSet from_ranking(gallery_size);
        for (ImageId id : r.ranking) {
            if (id < 0 || id >= gallery_size)
                throw Error(ErrorKind::Data, "retrieval result outside gallery: " + std::to_string(id));
            if (from_ranking.contains(id))
                throw Error(ErrorKind::Data, "duplicate id in retrieval ranking");
            from_ranking.insert(id);
        }
        if (from_ranking != r.results)
            throw Error(ErrorKind::Data, "retrieval ranking and result set disagree");
    }

    // Family nesting: within one (tool, query, polarity), smaller k is a
    // subset of larger k.
    std::map<std::tuple<std::string, std::string, int>, std::vector<const AtomicRetrieval*>> fams;
    for (const auto& r : pool)
        fams[{r.tool, r.query, static_cast<int>(r.polarity)}].push_back(&r);
    for (auto& [key, members] : fams) {
        std::sort(members.begin(), members.end(),
                  [](const AtomicRetrieval* a, const AtomicRetrieval* b) { return a->k < b->k; });
        for (std::size_t j = 1; j < members.size(); ++j) {
            if (!members[j - 1]->results.subset_of(members[j]->results))
                throw Error(ErrorKind::Data,
                            "family truncation nesting violated for tool " + members[j]->tool);
        }
    }
}

IncidenceData build_incidence(const Instance& instance) {
    instance.validate();

    IncidenceData inc;
    inc.gallery_size = instance.gallery_size;
    inc.ground_truth = instance.ground_truth;
    const CandidateSet noise_universe = instance.non_ground_truth();

    inc.gt_degree.assign(static_cast<std::size_t>(instance.gallery_size), 0);
    inc.noise_degree.assign(static_cast<std::size_t>(instance.gallery_size), 0);

    std::set<std::string> tool_names;
    for (const auto& r : instance.pool) tool_names.insert(r.tool);
    inc.tools.assign(tool_names.begin(), tool_names.end());
    auto tool_index = [&](const std::string& tool) {
        return static_cast<int>(std::lower_bound(inc.tools.begin(), inc.tools.end(), tool) -
                                inc.tools.begin());
    };

    for (int idx = 0; idx < static_cast<int>(instance.pool.size()); ++idx) {
        const auto& r = instance.pool[static_cast<std::size_t>(idx)];
        if (r.polarity == Polarity::Positive) {
            inc.positives.push_back({idx, r.id, tool_index(r.tool)});
            CandidateSet gt = r.results & instance.ground_truth;
            CandidateSet noise = r.results & noise_universe;
            gt.for_each([&](ImageId i) { inc.gt_degree[static_cast<std::size_t>(i)]++; });
            noise.for_each([&](ImageId i) { inc.noise_degree[static_cast<std::size_t>(i)]++; });
            inc.gt_hits.push_back(std::move(gt));
            inc.noise_hits.push_back(std::move(noise));
        } else {
            inc.negative_pool.push_back(idx);
        }
    }

    // Families keyed by (tool, query, polarity), members ordered by ascending
    // k; family order follows first appearance in the pool.
    std::map<std::tuple<std::string, std::string, int>, std::size_t> fam_index;
    for (int idx = 0; idx < static_cast<int>(instance.pool.size()); ++idx) {
        const auto& r = instance.pool[static_cast<std::size_t>(idx)];
        std::tuple<std::string, std::string, int> key{r.tool, r.query,
                                                      static_cast<int>(r.polarity)};
        auto it = fam_index.find(key);
        if (it == fam_index.end()) {
            fam_index.emplace(key, inc.families.size());
            inc.families.push_back({r.tool, r.query, r.polarity, {r.id}});
        } else {
            inc.families[it->second].member_ids.push_back(r.id);
        }
    }
    std::map<int, const AtomicRetrieval*> by_id;
    for (const auto& r : instance.pool) by_id[r.id] = &r;
    for (auto& fam : inc.families) {
        std::sort(fam.member_ids.begin(), fam.member_ids.end(),
                  [&](int a, int b) { return by_id.at(a)->k < by_id.at(b)->k; });
    }
    return inc;
}

std::vector<Family> families_of(const IncidenceData& inc, Polarity p) {
    std::vector<Family> out;
    for (const auto& f : inc.families) {
        if (f.polarity == p) out.push_back(f);
    }
    return out;
}

}  // namespace setplan::core
