#include "setplan/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace setplan::pipeline {

using nlohmann::json;

void PipelineConfig::validate() const {
    stage1_weights.validate();
    stage2_weights.validate();
    if (composer != "two_clause" && composer != "dnf")
        throw Error(ErrorKind::Config, "unknown composer: " + composer);
    if (dnf_budget < 1) throw Error(ErrorKind::Config, "DNF clause budget must be positive");
    if (threads < 1) throw Error(ErrorKind::Config, "parallelism degree must be positive");
    for (int k : recall_cutoffs)
        if (k < 1) throw Error(ErrorKind::Config, "recall cutoffs must be positive");
    for (int k : map_cutoffs)
        if (k < 1) throw Error(ErrorKind::Config, "mAP cutoffs must be positive");
    for (int k : ndcg_cutoffs)
        if (k < 1) throw Error(ErrorKind::Config, "NDCG cutoffs must be positive");
}

std::string PipelineConfig::to_json() const {
    json j;
    j["stage1_weights"] = {{"recall", stage1_weights.recall_weight.to_string()},
                           {"noise", stage1_weights.noise_weight.to_string()},
                           {"diversity", stage1_weights.diversity_weight.to_string()}};
    j["stage2_weights"] = {{"noise_penalty", stage2_weights.noise_penalty.to_string()}};
    j["composer"] = composer;
    j["clause_limits"] = {{"max_len", clause_limits.max_len},
                          {"max_negative", clause_limits.max_negative},
                          {"clause_budget", clause_limits.clause_budget}};
    j["dnf_budget"] = dnf_budget;
    j["dnf_complexity_penalty"] = dnf_complexity_penalty.to_string();
    j["solve_limits"] = {{"max_nodes", solve_limits.max_nodes},
                         {"time_limit_ms", solve_limits.time_limit_ms}};
    j["threads"] = threads;
    j["recall_cutoffs"] = recall_cutoffs;
    j["map_cutoffs"] = map_cutoffs;
    j["ndcg_cutoffs"] = ndcg_cutoffs;
    return j.dump();
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed pipeline config: ") + e.what());
    }
    PipelineConfig c;
    if (j.contains("stage1_weights")) {
        const auto& w = j["stage1_weights"];
        c.stage1_weights.recall_weight = Rational::parse(w.value("recall", "1"));
        c.stage1_weights.noise_weight = Rational::parse(w.value("noise", "1/2"));
        c.stage1_weights.diversity_weight = Rational::parse(w.value("diversity", "1/100"));
    }
    if (j.contains("stage2_weights"))
        c.stage2_weights.noise_penalty =
            Rational::parse(j["stage2_weights"].value("noise_penalty", "1/10"));
    c.composer = j.value("composer", c.composer);
    if (j.contains("clause_limits")) {
        const auto& l = j["clause_limits"];
        c.clause_limits.max_len = l.value("max_len", c.clause_limits.max_len);
        c.clause_limits.max_negative = l.value("max_negative", c.clause_limits.max_negative);
        c.clause_limits.clause_budget = l.value("clause_budget", c.clause_limits.clause_budget);
    }
    c.dnf_budget = j.value("dnf_budget", c.dnf_budget);
    if (j.contains("dnf_complexity_penalty"))
        c.dnf_complexity_penalty = Rational::parse(j["dnf_complexity_penalty"].get<std::string>());
    if (j.contains("solve_limits")) {
        const auto& l = j["solve_limits"];
        c.solve_limits.max_nodes = l.value("max_nodes", c.solve_limits.max_nodes);
        c.solve_limits.time_limit_ms = l.value("time_limit_ms", c.solve_limits.time_limit_ms);
    }
    c.threads = j.value("threads", c.threads);
    c.recall_cutoffs = j.value("recall_cutoffs", c.recall_cutoffs);
    c.map_cutoffs = j.value("map_cutoffs", c.map_cutoffs);
    c.ndcg_cutoffs = j.value("ndcg_cutoffs", c.ndcg_cutoffs);
    c.validate();
    return c;
}

namespace {

plan::ToolCall call_of(const AtomicRetrieval& r) {
    return {r.tool, r.query, r.polarity, r.k};
}

const AtomicRetrieval& retrieval_by_id(const Instance& instance, int id) {
    for (const auto& r : instance.pool) {
        if (r.id == id) return r;
    }
    throw Error(ErrorKind::Reference, "unknown retrieval id " + std::to_string(id));
}

// Builds the DNF plan descriptor: each clause is an intersection of its
// positive literals minus the union of its negated ones; the final step
// unions the clauses.
plan::PlanDescriptor dnf_descriptor(const Instance& instance,
                                    const std::vector<dnf::Clause>& clauses,
                                    const std::vector<int>& selected) {
    plan::PlanDescriptor plan;
    plan.composer = "dnf";

    std::vector<int> call_ids;
    std::map<int, int> call_index;
    for (int c : selected) {
        for (const auto& lit : clauses[static_cast<std::size_t>(c)].literals) {
            if (!call_index.count(lit.retrieval_id)) {
                call_index[lit.retrieval_id] = static_cast<int>(call_ids.size());
                call_ids.push_back(lit.retrieval_id);
                plan.calls.push_back(call_of(retrieval_by_id(instance, lit.retrieval_id)));
            }
        }
    }

    std::vector<setops::Operand> clause_names;
    int ci = 0;
    for (int c : selected) {
        const auto& clause = clauses[static_cast<std::size_t>(c)];
        std::string base = "clause" + std::to_string(ci++);
        setops::Step keep;
        keep.name = base + "_keep";
        keep.op = setops::SetOp::Intersect;
        setops::Step drop;
        drop.name = base + "_drop";
        drop.op = setops::SetOp::Union;
        for (const auto& lit : clause.literals) {
            int idx = call_index.at(lit.retrieval_id);
            (lit.negated ? drop : keep).operands.push_back(idx);
        }
        plan.steps.steps.push_back(keep);
        if (!drop.operands.empty()) {
            plan.steps.steps.push_back(drop);
            setops::Step diff;
            diff.name = base;
            diff.op = setops::SetOp::Difference;
            diff.operands = {std::string(keep.name), std::string(drop.name)};
            plan.steps.steps.push_back(std::move(diff));
            clause_names.push_back(base);
        } else {
            clause_names.push_back(keep.name);
        }
    }

    setops::Step final_step;
    final_step.name = "final";
    final_step.op = setops::SetOp::Union;
    final_step.operands = clause_names;
    plan.steps.steps.push_back(std::move(final_step));
    return plan;
}

}  // namespace

namespace {

Trajectory compose_from(const PipelineConfig& config, const Instance& instance, int index,
                        const IncidenceData& incidence, const stage1::Stage1Solution& s1);

}  // namespace

Trajectory solve_instance(const PipelineConfig& config, const Instance& instance, int index) {
    IncidenceData incidence = build_incidence(instance);
    stage1::Stage1Solution s1 =
        stage1::solve_stage1(instance, incidence, config.stage1_weights, config.solve_limits);
    return compose_from(config, instance, index, incidence, s1);
}

Trajectory compose_instance(const PipelineConfig& config, const Instance& instance, int index,
                            const std::vector<int>& stage1_selected) {
    IncidenceData incidence = build_incidence(instance);
    stage1::Stage1Solution s1;
    s1.universe = CandidateSet(instance.gallery_size);
    std::set<std::string> tools;
    for (int id : stage1_selected) {
        const AtomicRetrieval& r = retrieval_by_id(instance, id);
        if (r.polarity != Polarity::Positive)
            throw Error(ErrorKind::Data, "stage-1 selection contains a negative retrieval");
        s1.selected.push_back(id);
        s1.universe |= r.results;
        tools.insert(r.tool);
    }
    std::sort(s1.selected.begin(), s1.selected.end());
    s1.active_tools.assign(tools.begin(), tools.end());
    const int gt_count = instance.ground_truth.count();
    const int noise_total = instance.gallery_size - gt_count;
    const int covered_gt = s1.universe.intersect_count(instance.ground_truth);
    s1.coverage = Rational(covered_gt) / Rational(gt_count);
    // Set-level objective of the resumed selection under current weights.
    s1.objective = config.stage1_weights.recall_weight * s1.coverage;
    if (noise_total > 0)
        s1.objective -= config.stage1_weights.noise_weight *
                        Rational(s1.universe.count() - covered_gt) / Rational(noise_total);
    s1.objective += config.stage1_weights.diversity_weight *
                    Rational(static_cast<std::int64_t>(tools.size()));
    return compose_from(config, instance, index, incidence, s1);
}

namespace {

Trajectory compose_from(const PipelineConfig& config, const Instance& instance, int index,
                        const IncidenceData& incidence, const stage1::Stage1Solution& s1) {
    Trajectory t;
    t.instance_index = index;
    t.query_text = instance.query_text;
    t.caption = instance.caption;
    t.final_set = CandidateSet(instance.gallery_size);
    t.f1 = Rational(0);
    t.stage1_selected = s1.selected;
    t.stage1_objective = s1.objective;
    t.coverage = s1.coverage;
    t.active_tools = s1.active_tools;
    t.universe_size = s1.universe.count();
    t.budget_hit = !s1.proven;

    if (s1.universe.empty()) {
        t.status = "empty_universe";
        return t;
    }

    std::vector<int> negatives_pool;
    for (int idx : incidence.negative_pool)
        negatives_pool.push_back(instance.pool[static_cast<std::size_t>(idx)].id);

    if (config.composer == "two_clause") {
        stage2::Stage2Solution s2 = stage2::solve_stage2(instance, s1, negatives_pool,
                                                         config.stage2_weights,
                                                         config.solve_limits);
        t.positives = s2.plan.positives;
        t.negatives = s2.plan.negatives;
        t.stage2_objective = s2.objective;
        t.budget_hit = t.budget_hit || !s2.proven;
        t.final_set = s2.plan.final_set;

        std::vector<plan::ToolCall> pos_calls, neg_calls;
        for (int id : s2.plan.positives) pos_calls.push_back(call_of(retrieval_by_id(instance, id)));
        for (int id : s2.plan.negatives) neg_calls.push_back(call_of(retrieval_by_id(instance, id)));
        t.plan = plan::two_clause_descriptor(pos_calls, neg_calls);
    } else {
        std::vector<stage2::PoolEntry> positives, negatives;
        for (int id : s1.selected)
            positives.push_back({id, retrieval_by_id(instance, id).results & s1.universe});
        for (int id : negatives_pool)
            negatives.push_back({id, retrieval_by_id(instance, id).results & s1.universe});
        std::vector<dnf::Clause> clauses =
            dnf::enumerate_clauses(s1.universe, positives, negatives, config.clause_limits);
        // F1 counts the full ground truth in its denominator, including
        // images the universe never reached.
        dnf::DnfSolution sol =
            dnf::solve_f1_dnf(clauses, instance.ground_truth, config.dnf_budget,
                              config.dnf_complexity_penalty, config.solve_limits);
        t.lambda_trace = sol.lambda_trace;
        t.stage2_objective = sol.f1;
        t.final_set = sol.result;

        std::set<int> pos_used, neg_used;
        for (int c : sol.selected) {
            for (const auto& lit : clauses[static_cast<std::size_t>(c)].literals)
                (lit.negated ? neg_used : pos_used).insert(lit.retrieval_id);
        }
        t.positives.assign(pos_used.begin(), pos_used.end());
        t.negatives.assign(neg_used.begin(), neg_used.end());
        if (!sol.selected.empty()) t.plan = dnf_descriptor(instance, clauses, sol.selected);
    }

    t.f1 = eval::f1_score(t.final_set, instance.ground_truth);
    t.status = "ok";
    return t;
}

}  // namespace

plan::PlanDescriptor make_naive_plan(const Instance& instance) {
    IncidenceData incidence = build_incidence(instance);
    std::map<int, const AtomicRetrieval*> by_id;
    for (const auto& r : instance.pool) by_id[r.id] = &r;

    std::vector<plan::ToolCall> calls;
    for (const auto& fam : incidence.families) {
        if (fam.polarity != Polarity::Positive) continue;
        calls.push_back(call_of(*by_id.at(fam.member_ids.back())));  // largest k
    }
    if (calls.empty())
        throw Error(ErrorKind::Model, "instance has no positive retrievals to union");

    plan::PlanDescriptor plan;
    plan.composer = "union_all";
    plan.calls = calls;
    setops::Step final_step;
    final_step.name = "final";
    final_step.op = setops::SetOp::Union;
    for (int j = 0; j < static_cast<int>(calls.size()); ++j) final_step.operands.push_back(j);
    plan.steps.steps.push_back(std::move(final_step));
    return plan;
}

eval::Ranking fallback_ranking(const Instance& instance, const std::vector<int>& retrieval_ids,
                               const CandidateSet& final_set) {
    std::map<ImageId, int> order;
    for (int id : retrieval_ids) {
        const AtomicRetrieval& r = retrieval_by_id(instance, id);
        if (r.polarity != Polarity::Positive) continue;
        for (int rank = 0; rank < static_cast<int>(r.ranking.size()); ++rank) {
            ImageId img = r.ranking[static_cast<std::size_t>(rank)];
            auto it = order.find(img);
            if (it == order.end() || rank < it->second) order[img] = rank;
        }
    }
    return eval::rank_final_set(final_set, {}, order);
}

ReplayOutcome execute_plan(const plan::PlanDescriptor& descriptor, const Instance& instance) {
    // Families available on this instance, keyed by tool and polarity.
    struct FamilyRef {
        std::string query;
        std::vector<const AtomicRetrieval*> members;  // ascending k
    };
    std::map<std::pair<std::string, int>, std::vector<FamilyRef>> available;
    {
        IncidenceData incidence = build_incidence(instance);
        std::map<int, const AtomicRetrieval*> by_id;
        for (const auto& r : instance.pool) by_id[r.id] = &r;
        for (const auto& fam : incidence.families) {
            FamilyRef ref;
            ref.query = fam.query;
            for (int id : fam.member_ids) ref.members.push_back(by_id.at(id));
            available[{fam.tool, static_cast<int>(fam.polarity)}].push_back(std::move(ref));
        }
        for (auto& [key, fams] : available) {
            std::sort(fams.begin(), fams.end(),
                      [](const FamilyRef& a, const FamilyRef& b) { return a.query < b.query; });
        }
    }

    ReplayOutcome out;
    out.final_set = CandidateSet(instance.gallery_size);
    std::vector<CandidateSet> operand_sets;
    std::map<std::pair<std::string, int>, int> occurrence;

    for (const auto& call : descriptor.calls) {
        auto key = std::make_pair(call.tool, static_cast<int>(call.polarity));
        auto it = available.find(key);
        if (it == available.end()) {
            std::set<std::string> tools;
            for (const auto& r : instance.pool) tools.insert(r.tool);
            std::string listing;
            for (const auto& tool : tools) listing += (listing.empty() ? "" : ", ") + tool;
            throw Error(ErrorKind::Reference, "no " + std::string(polarity_name(call.polarity)) +
                                                  " retrievals for tool " + call.tool +
                                                  "; instance offers: " + listing);
        }
        const auto& fams = it->second;
        const FamilyRef* chosen = nullptr;
        for (const auto& fam : fams) {
            if (fam.query == call.query) {
                chosen = &fam;
                break;
            }
        }
        if (!chosen) {
            int occ = occurrence[key]++;
            chosen = &fams[static_cast<std::size_t>(occ) % fams.size()];
        }

        // Nearest k at or below the requested level; smallest otherwise.
        const AtomicRetrieval* member = nullptr;
        for (const auto* candidate : chosen->members) {
            if (candidate->k <= call.k && (!member || candidate->k > member->k))
                member = candidate;
        }
        if (!member) member = chosen->members.front();
        if (member->k != call.k) out.k_adjusted = true;

        operand_sets.push_back(member->results);
        out.used_retrievals.push_back(member->id);
    }

    auto results = setops::execute_steps(descriptor.steps, operand_sets);
    out.final_set = results.at("final");
    out.ranking = fallback_ranking(instance, out.used_retrievals, out.final_set);
    return out;
}

ReplayOutcome replay_case(const library::Case& stored, const Instance& instance) {
    return execute_plan(stored.plan, instance);
}

RunReport run_pipeline(const PipelineConfig& config, const std::vector<Instance>& instances) {
    config.validate();
    RunReport report;
    report.config = config;
    report.trajectories.resize(instances.size());

    const int workers =
        std::max(1, std::min<int>(config.threads, static_cast<int>(instances.size())));
    auto work = [&](int worker) {
        for (std::size_t i = static_cast<std::size_t>(worker); i < instances.size();
             i += static_cast<std::size_t>(workers)) {
            Trajectory& t = report.trajectories[i];
            try {
                t = solve_instance(config, instances[i], static_cast<int>(i));
            } catch (const Error& e) {
                t.instance_index = static_cast<int>(i);
                t.status = "error";
                t.error_kind = Error::kind_name(e.kind());
                t.error_message = e.what();
            } catch (const std::exception& e) {
                t.instance_index = static_cast<int>(i);
                t.status = "error";
                t.error_kind = "internal";
                t.error_message = e.what();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    for (const auto& t : report.trajectories) {
        if (t.status == "error") report.failed_instances.push_back(t.instance_index);
        report.any_budget_hit = report.any_budget_hit || t.budget_hit;
    }
    report.metrics = compute_metrics(config, instances, report.trajectories);
    return report;
}

AggregateMetrics compute_metrics(const PipelineConfig& config,
                                 const std::vector<Instance>& instances,
                                 const std::vector<Trajectory>& trajectories) {
    AggregateMetrics agg;
    agg.mean_f1 = Rational(0);

    std::vector<eval::Ranking> rankings;
    std::vector<CandidateSet> gts;
    Rational f1_sum(0);
    int counted = 0;
    for (const auto& t : trajectories) {
        if (t.status == "error") continue;
        const Instance& instance = instances[static_cast<std::size_t>(t.instance_index)];
        std::vector<int> selected = t.positives;
        selected.insert(selected.end(), t.negatives.begin(), t.negatives.end());
        rankings.push_back(fallback_ranking(instance, selected, t.final_set));
        gts.push_back(instance.ground_truth);
        f1_sum += t.f1;
        ++counted;
    }
    if (counted == 0) return agg;
    agg.mean_f1 = f1_sum / Rational(counted);

    for (int k : config.recall_cutoffs) {
        Rational sum(0);
        for (std::size_t q = 0; q < rankings.size(); ++q)
            sum += eval::recall_at_k(rankings[q], gts[q], k);
        agg.recall.push_back({k, sum / Rational(counted)});
    }
    for (int k : config.map_cutoffs) agg.map.push_back({k, eval::map_at_k(rankings, gts, k)});
    for (int k : config.ndcg_cutoffs) {
        double sum = 0.0;
        for (std::size_t q = 0; q < rankings.size(); ++q)
            sum += eval::ndcg_at_k(rankings[q], gts[q], k);
        agg.ndcg.push_back({k, sum / counted});
    }
    return agg;
}

namespace {

json rational_list(const std::vector<Rational>& values) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(v.to_string());
    return arr;
}

}  // namespace

std::string trajectories_to_jsonl(const RunReport& report) {
    std::string out;
    json header;
    header["record"] = "header";
    header["version"] = 1;
    header["kind"] = "trajectories";
    header["code_version"] = kCodeVersion;
    header["config"] = json::parse(report.config.to_json());
    out += header.dump();
    out += '\n';

    for (const auto& t : report.trajectories) {
        json rec;
        rec["record"] = t.status == "error" ? "error" : "trajectory";
        rec["instance"] = t.instance_index;
        if (t.status == "error") {
            rec["kind"] = t.error_kind;
            rec["message"] = t.error_message;
            out += rec.dump();
            out += '\n';
            continue;
        }
        rec["status"] = t.status;
        rec["query_text"] = t.query_text;
        rec["caption"] = t.caption;
        rec["budget_hit"] = t.budget_hit;
        rec["tie_break"] = "dfs-first-improvement";
        json s1;
        s1["selected"] = t.stage1_selected;
        s1["objective"] = t.stage1_objective.to_string();
        s1["coverage"] = t.coverage.to_string();
        s1["tools"] = t.active_tools;
        s1["universe_size"] = t.universe_size;
        rec["stage1"] = std::move(s1);
        if (t.status == "ok") {
            json s2;
            s2["positives"] = t.positives;
            s2["negatives"] = t.negatives;
            s2["objective"] = t.stage2_objective.to_string();
            rec["stage2"] = std::move(s2);
            if (!t.lambda_trace.empty()) rec["lambda_trace"] = rational_list(t.lambda_trace);
            if (t.plan) rec["plan"] = json::parse(plan::plan_to_json(*t.plan));
            rec["f1"] = t.f1.to_string();
            rec["final_size"] = t.final_set.count();
        }
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<Trajectory> trajectories_from_jsonl(const std::string& text, PipelineConfig* config) {
    std::vector<Trajectory> out;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Data, std::string("bad trajectory record: ") + e.what());
        }
        const std::string kind = rec.value("record", "");
        if (kind == "header") {
            if (!rec.contains("version") || rec["version"].get<int>() != 1)
                throw Error(ErrorKind::Data, "unsupported trajectory format version");
            if (config && rec.contains("config"))
                *config = PipelineConfig::from_json(rec["config"].dump());
            have_header = true;
        } else if (kind == "trajectory") {
            if (!have_header) throw Error(ErrorKind::Data, "trajectory before header");
            Trajectory t;
            t.instance_index = rec.at("instance").get<int>();
            t.status = rec.value("status", "ok");
            t.query_text = rec.value("query_text", "");
            t.caption = rec.value("caption", "");
            t.budget_hit = rec.value("budget_hit", false);
            if (rec.contains("stage1")) {
                const auto& s1 = rec["stage1"];
                t.stage1_selected = s1.value("selected", std::vector<int>{});
                t.stage1_objective = Rational::parse(s1.value("objective", "0"));
                t.coverage = Rational::parse(s1.value("coverage", "0"));
                t.active_tools = s1.value("tools", std::vector<std::string>{});
                t.universe_size = s1.value("universe_size", 0);
            }
            if (rec.contains("stage2")) {
                const auto& s2 = rec["stage2"];
                t.positives = s2.value("positives", std::vector<int>{});
                t.negatives = s2.value("negatives", std::vector<int>{});
                t.stage2_objective = Rational::parse(s2.value("objective", "0"));
            }
            if (rec.contains("lambda_trace")) {
                for (const auto& v : rec["lambda_trace"])
                    t.lambda_trace.push_back(Rational::parse(v.get<std::string>()));
            }
            if (rec.contains("plan")) t.plan = plan::plan_from_json(rec["plan"].dump());
            if (rec.contains("f1")) t.f1 = Rational::parse(rec["f1"].get<std::string>());
            out.push_back(std::move(t));
        } else if (kind == "error") {
            Trajectory t;
            t.instance_index = rec.at("instance").get<int>();
            t.status = "error";
            t.error_kind = rec.value("kind", "");
            t.error_message = rec.value("message", "");
            out.push_back(std::move(t));
        } else {
            throw Error(ErrorKind::Data, "unknown trajectory record type: " + kind);
        }
    }
    if (!have_header) throw Error(ErrorKind::Data, "trajectory file has no header record");
    return out;
}

std::string stage1_to_jsonl(const PipelineConfig& config,
                            const std::vector<Trajectory>& trajectories) {
    std::string out;
    json header;
    header["record"] = "header";
    header["version"] = 1;
    header["kind"] = "stage1-solutions";
    header["code_version"] = kCodeVersion;
    header["config"] = json::parse(config.to_json());
    out += header.dump();
    out += '\n';
    for (const auto& t : trajectories) {
        json rec;
        if (t.status == "error") {
            rec["record"] = "error";
            rec["instance"] = t.instance_index;
            rec["kind"] = t.error_kind;
            rec["message"] = t.error_message;
        } else {
            rec["record"] = "stage1";
            rec["instance"] = t.instance_index;
            rec["selected"] = t.stage1_selected;
            rec["objective"] = t.stage1_objective.to_string();
            rec["coverage"] = t.coverage.to_string();
            rec["tools"] = t.active_tools;
            rec["universe_size"] = t.universe_size;
            rec["proven"] = !t.budget_hit;
        }
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::vector<int>> stage1_from_jsonl(const std::string& text) {
    std::vector<std::vector<int>> out;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Data, std::string("bad stage-1 record: ") + e.what());
        }
        const std::string kind = rec.value("record", "");
        if (kind == "header") {
            if (!rec.contains("version") || rec["version"].get<int>() != 1)
                throw Error(ErrorKind::Data, "unsupported stage-1 format version");
            have_header = true;
        } else if (kind == "stage1") {
            int idx = rec.at("instance").get<int>();
            if (idx != static_cast<int>(out.size()))
                throw Error(ErrorKind::Data, "stage-1 records out of sequence");
            out.push_back(rec.at("selected").get<std::vector<int>>());
        } else if (kind == "error") {
            out.push_back({});
        } else {
            throw Error(ErrorKind::Data, "unknown stage-1 record type: " + kind);
        }
    }
    if (!have_header) throw Error(ErrorKind::Data, "stage-1 file has no header record");
    return out;
}

std::string report_to_json(const RunReport& report) {
    json j;
    j["record"] = "run-report";
    j["version"] = 1;
    j["code_version"] = kCodeVersion;
    j["config"] = json::parse(report.config.to_json());
    j["instances"] = report.trajectories.size();
    j["failures"] = report.failed_instances;
    j["any_budget_hit"] = report.any_budget_hit;
    json m;
    m["mean_f1"] = report.metrics.mean_f1.to_string();
    for (const auto& [k, v] : report.metrics.recall)
        m["recall@" + std::to_string(k)] = v.to_string();
    for (const auto& [k, v] : report.metrics.map) m["map@" + std::to_string(k)] = v.to_string();
    for (const auto& [k, v] : report.metrics.ndcg) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.9f", v);
        m["ndcg@" + std::to_string(k)] = buf;
    }
    j["metrics"] = std::move(m);
    return j.dump(2) + "\n";
}

}  // namespace setplan::pipeline
