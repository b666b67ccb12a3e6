#include "setplan/synth.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "setplan/rng.hpp"

namespace setplan::synth {

using nlohmann::json;

namespace {

// Stream tags for the per-instance generators.
enum Stream : std::uint64_t {
    kGroundTruth = 1,
    kDistractors = 2,
    kAdversarial = 3,
    kText = 4,
    kFamilyBase = 100,  // + family index
};

std::vector<ImageId> sample_distinct(CounterRng& rng, int count, int gallery,
                                     const CandidateSet& exclude) {
    std::vector<ImageId> out;
    CandidateSet taken = exclude;
    while (static_cast<int>(out.size()) < count) {
        ImageId id = static_cast<ImageId>(rng.next_below(static_cast<std::uint64_t>(gallery)));
        if (taken.contains(id)) continue;
        taken.insert(id);
        out.push_back(id);
    }
    return out;
}

}  // namespace

void GeneratorConfig::validate() const {
    auto prob = [](double p, const char* what) {
        if (p < 0.0 || p > 1.0)
            throw Error(ErrorKind::Config, std::string(what) + " must be in [0, 1]");
    };
    for (double h : hit_rates) prob(h, "hit rate");
    prob(distractor_overlap, "distractor overlap");
    prob(negative_fidelity, "negative fidelity");
    prob(negative_gt_leak, "negative ground-truth leak");
    prob(adversarial_fraction, "adversarial fraction");
    if (hit_rates.empty()) throw Error(ErrorKind::Config, "hit-rate profile is empty");
    if (gt_min < 1 || gt_max < gt_min)
        throw Error(ErrorKind::Config, "ground-truth range is invalid");
    if (tool_count < 1) throw Error(ErrorKind::Config, "tool count must be positive");
    if (pool_target < tool_count)
        throw Error(ErrorKind::Config, "pool size target below tool count");
    if (truncation_grid.empty())
        throw Error(ErrorKind::Config, "truncation grid is empty");
    for (std::size_t j = 1; j < truncation_grid.size(); ++j) {
        if (truncation_grid[j] <= truncation_grid[j - 1])
            throw Error(ErrorKind::Config, "truncation grid must be strictly increasing");
    }
    if (gt_max + distractor_count + adversarial_early_fillers >= gallery_size)
        throw Error(ErrorKind::Config, "gallery too small for ground truth plus planted noise");
    if (adversarial_fraction > 0.0 &&
        gt_max + distractor_count + adversarial_early_fillers > truncation_grid.back())
        throw Error(ErrorKind::Config,
                    "adversarial planting does not fit below the largest truncation");
    if (cluster_count < 1) throw Error(ErrorKind::Config, "cluster count must be positive");
}

std::string GeneratorConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["gallery_size"] = gallery_size;
    j["gt_min"] = gt_min;
    j["gt_max"] = gt_max;
    j["tool_count"] = tool_count;
    j["hit_rates"] = hit_rates;
    j["distractor_count"] = distractor_count;
    j["distractor_overlap"] = distractor_overlap;
    j["negative_fidelity"] = negative_fidelity;
    j["negative_gt_leak"] = negative_gt_leak;
    j["pool_target"] = pool_target;
    j["negative_every"] = negative_every;
    j["truncation_grid"] = truncation_grid;
    j["adversarial_fraction"] = adversarial_fraction;
    j["adversarial_early_fillers"] = adversarial_early_fillers;
    j["cluster_count"] = cluster_count;
    return j.dump(2);
}

GeneratorConfig GeneratorConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed generator config: ") + e.what());
    }
    GeneratorConfig c;
    c.seed = j.value("seed", c.seed);
    c.gallery_size = j.value("gallery_size", c.gallery_size);
    c.gt_min = j.value("gt_min", c.gt_min);
    c.gt_max = j.value("gt_max", c.gt_max);
    c.tool_count = j.value("tool_count", c.tool_count);
    c.hit_rates = j.value("hit_rates", c.hit_rates);
    c.distractor_count = j.value("distractor_count", c.distractor_count);
    c.distractor_overlap = j.value("distractor_overlap", c.distractor_overlap);
    c.negative_fidelity = j.value("negative_fidelity", c.negative_fidelity);
    c.negative_gt_leak = j.value("negative_gt_leak", c.negative_gt_leak);
    c.pool_target = j.value("pool_target", c.pool_target);
    c.negative_every = j.value("negative_every", c.negative_every);
    c.truncation_grid = j.value("truncation_grid", c.truncation_grid);
    c.adversarial_fraction = j.value("adversarial_fraction", c.adversarial_fraction);
    c.adversarial_early_fillers = j.value("adversarial_early_fillers", c.adversarial_early_fillers);
    c.cluster_count = j.value("cluster_count", c.cluster_count);
    c.validate();
    return c;
}

GeneratorConfig GeneratorConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read generator config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

Instance generate_instance(const GeneratorConfig& config, int index) {
    config.validate();
    const int gallery = config.gallery_size;
    const std::uint64_t seed = config.seed;
    const auto idx = static_cast<std::uint64_t>(index);

    Instance instance;
    instance.gallery_size = gallery;

    CounterRng gt_rng(seed, idx, kGroundTruth);
    const int gt_count = gt_rng.next_int(config.gt_min, std::min(config.gt_max, gallery - 1));
    instance.ground_truth = CandidateSet(gallery);
    std::vector<ImageId> gt_ids =
        sample_distinct(gt_rng, gt_count, gallery, CandidateSet(gallery));
    for (ImageId id : gt_ids) instance.ground_truth.insert(id);

    CounterRng dis_rng(seed, idx, kDistractors);
    std::vector<ImageId> distractors =
        sample_distinct(dis_rng, config.distractor_count, gallery, instance.ground_truth);
    CandidateSet planted = instance.ground_truth;
    for (ImageId id : distractors) planted.insert(id);

    CounterRng adv_rng(seed, idx, kAdversarial);
    const bool adversarial = adv_rng.bernoulli(config.adversarial_fraction);

    // Family layout: full grids first, then one trimmed family if the pool
    // target is not a multiple of the grid size.
    const int grid_size = static_cast<int>(config.truncation_grid.size());
    const int full_families = config.pool_target / grid_size;
    const int remainder = config.pool_target % grid_size;
    const int family_count = full_families + (remainder > 0 ? 1 : 0);
    const int k_max = config.truncation_grid.back();

    int next_id = 0;
    for (int f = 0; f < family_count; ++f) {
        CounterRng rng(seed, idx, kFamilyBase + static_cast<std::uint64_t>(f));
        const int tool = f % config.tool_count;
        const bool negative =
            config.negative_every > 0 && f % config.negative_every == config.negative_every - 1 &&
            f > 0;
        const double hit_rate =
            config.hit_rates[static_cast<std::size_t>(tool) % config.hit_rates.size()];

        std::vector<ImageId> ranking;
        CandidateSet used(gallery);
        auto push = [&](ImageId id) {
            if (!used.contains(id)) {
                used.insert(id);
                ranking.push_back(id);
            }
        };

        if (!negative) {
            std::vector<ImageId> hits;
            for (ImageId g : gt_ids) {
                if (rng.bernoulli(hit_rate)) hits.push_back(g);
            }
            std::vector<ImageId> noise;
            for (ImageId d : distractors) {
                if (rng.bernoulli(adversarial ? 1.0 : config.distractor_overlap))
                    noise.push_back(d);
            }
            if (adversarial) {
                // Private early fillers, then the full distractor block,
                // then the hits: any slice reaching the ground truth drags
                // the distractors along.
                for (ImageId id :
                     sample_distinct(rng, config.adversarial_early_fillers, gallery, planted))
                    push(id);
                rng.shuffle(noise);
                for (ImageId id : noise) push(id);
                rng.shuffle(hits);
                for (ImageId id : hits) push(id);
            } else {
                std::vector<ImageId> head = hits;
                head.insert(head.end(), noise.begin(), noise.end());
                rng.shuffle(head);
                for (ImageId id : head) push(id);
            }
        } else {
            std::vector<ImageId> targets;
            for (ImageId d : distractors) {
                if (rng.bernoulli(adversarial ? 1.0 : config.negative_fidelity))
                    targets.push_back(d);
            }
            if (!adversarial) {
                for (ImageId g : gt_ids) {
                    if (rng.bernoulli(config.negative_gt_leak)) targets.push_back(g);
                }
            }
            rng.shuffle(targets);
            for (ImageId id : targets) push(id);
        }

        // Fillers to k_max, avoiding planted content so negatives stay
        // clean and positive tails are plain noise.
        const int available = gallery - (planted | used).count();
        const int target = std::min(k_max, static_cast<int>(ranking.size()) + available);
        while (static_cast<int>(ranking.size()) < target) {
            ImageId id = static_cast<ImageId>(rng.next_below(static_cast<std::uint64_t>(gallery)));
            if (planted.contains(id) || used.contains(id)) continue;
            push(id);
        }

        const int levels = (f < full_families) ? grid_size : remainder;
        std::vector<int> grid(config.truncation_grid.begin(),
                              config.truncation_grid.begin() + levels);
        std::vector<CandidateSet> slices = slice_truncations(gallery, ranking, grid);
        for (int level = 0; level < levels; ++level) {
            AtomicRetrieval r;
            r.id = next_id++;
            r.tool = "tool" + std::to_string(tool);
            r.query = std::string(negative ? "avoid" : "find") + " concept f" + std::to_string(f) +
                      " i" + std::to_string(index);
            r.polarity = negative ? Polarity::Negative : Polarity::Positive;
            r.k = grid[static_cast<std::size_t>(level)];
            int take = std::min<int>(r.k, static_cast<int>(ranking.size()));
            r.ranking.assign(ranking.begin(), ranking.begin() + take);
            r.results = slices[static_cast<std::size_t>(level)];
            instance.pool.push_back(std::move(r));
        }
    }

    CounterRng text_rng(seed, idx, kText);
    const int cluster = index % config.cluster_count;
    auto token = [&](int j) {
        return "tok" + std::to_string(cluster) + "_" + std::to_string(j);
    };
    instance.query_text = "cluster" + std::to_string(cluster) + " query " +
                          token(text_rng.next_int(0, 9)) + " " + token(text_rng.next_int(0, 9)) +
                          " sample " + std::to_string(index);
    instance.caption = "caption " + token(text_rng.next_int(0, 9)) + " scene " +
                       token(text_rng.next_int(0, 9));

    instance.validate();
    return instance;
}

}  // namespace setplan::synth
