// setplan: derive, store, replay and evaluate optimal tool-call
// trajectories for composed set-valued retrieval.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "setplan/ablation.hpp"
#include "setplan/golden_library.hpp"
#include "setplan/instance_io.hpp"
#include "setplan/pipeline.hpp"
#include "setplan/synth.hpp"

namespace fs = std::filesystem;
using namespace setplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIo = 4;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Io:
            return kExitIo;
        case ErrorKind::Budget:
            return kExitBudget;
        default:
            return kExitValidation;
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// "wR,wP,lambdaDiv", each component an exact rational like 1, 1/2, 3/100.
void parse_stage1_weights(const std::string& text, stage1::Stage1Weights& weights) {
    std::istringstream in(text);
    std::string part;
    std::vector<Rational> parts;
    while (std::getline(in, part, ',')) parts.push_back(Rational::parse(part));
    if (parts.size() != 3)
        throw Error(ErrorKind::Config, "--weights expects wR,wP,lambdaDiv");
    weights.recall_weight = parts[0];
    weights.noise_weight = parts[1];
    weights.diversity_weight = parts[2];
    weights.validate();
}

// "recall@1,5,10,50 map@5,10 ndcg@10" tokens.
void parse_metrics(const std::vector<std::string>& specs, pipeline::PipelineConfig& config) {
    if (specs.empty()) return;
    config.recall_cutoffs.clear();
    config.map_cutoffs.clear();
    config.ndcg_cutoffs.clear();
    for (const auto& spec : specs) {
        auto at = spec.find('@');
        if (at == std::string::npos)
            throw Error(ErrorKind::Config, "metric spec needs name@cutoffs: " + spec);
        std::string name = spec.substr(0, at);
        std::vector<int>* target = nullptr;
        if (name == "recall")
            target = &config.recall_cutoffs;
        else if (name == "map")
            target = &config.map_cutoffs;
        else if (name == "ndcg")
            target = &config.ndcg_cutoffs;
        else
            throw Error(ErrorKind::Config, "unknown metric: " + name);
        std::istringstream in(spec.substr(at + 1));
        std::string num;
        while (std::getline(in, num, ',')) target->push_back(std::stoi(num));
    }
}

struct OptimizeOptions {
    std::string input;
    std::string output;
    std::string report_path;
    std::string stage = "all";
    std::string stage1_path;
    std::string weights_text;
    std::string lambda_reg;
    pipeline::PipelineConfig config;
};

int run_optimize(OptimizeOptions& opt) {
    if (!opt.weights_text.empty()) parse_stage1_weights(opt.weights_text, opt.config.stage1_weights);
    if (!opt.lambda_reg.empty()) {
        opt.config.stage2_weights.noise_penalty = Rational::parse(opt.lambda_reg);
        opt.config.stage2_weights.validate();
    }
    opt.config.validate();

    std::vector<core::Instance> instances = core::load_instances(opt.input);
    if (instances.empty()) throw Error(ErrorKind::Io, "no instances found at " + opt.input);

    pipeline::RunReport report;
    report.config = opt.config;

    if (opt.stage == "1") {
        report.trajectories.resize(instances.size());
        for (std::size_t i = 0; i < instances.size(); ++i) {
            try {
                core::IncidenceData incidence = core::build_incidence(instances[i]);
                auto s1 = stage1::solve_stage1(instances[i], incidence,
                                               opt.config.stage1_weights, opt.config.solve_limits);
                auto& t = report.trajectories[i];
                t.instance_index = static_cast<int>(i);
                t.status = "stage1";
                t.stage1_selected = s1.selected;
                t.stage1_objective = s1.objective;
                t.coverage = s1.coverage;
                t.active_tools = s1.active_tools;
                t.universe_size = s1.universe.count();
                t.budget_hit = !s1.proven;
                report.any_budget_hit = report.any_budget_hit || t.budget_hit;
            } catch (const Error& e) {
                auto& t = report.trajectories[i];
                t.instance_index = static_cast<int>(i);
                t.status = "error";
                t.error_kind = Error::kind_name(e.kind());
                t.error_message = e.what();
                report.failed_instances.push_back(static_cast<int>(i));
            }
        }
        write_file(opt.output, pipeline::stage1_to_jsonl(opt.config, report.trajectories));
    } else if (opt.stage == "2") {
        if (opt.stage1_path.empty())
            throw Error(ErrorKind::Config, "--stage 2 needs --stage1 <solutions file>");
        auto selections = pipeline::stage1_from_jsonl(read_file(opt.stage1_path));
        if (selections.size() != instances.size())
            throw Error(ErrorKind::Data, "stage-1 file does not match the instance corpus");
        report.trajectories.resize(instances.size());
        for (std::size_t i = 0; i < instances.size(); ++i) {
            try {
                report.trajectories[i] = pipeline::compose_instance(
                    opt.config, instances[i], static_cast<int>(i), selections[i]);
            } catch (const Error& e) {
                auto& t = report.trajectories[i];
                t.instance_index = static_cast<int>(i);
                t.status = "error";
                t.error_kind = Error::kind_name(e.kind());
                t.error_message = e.what();
                report.failed_instances.push_back(static_cast<int>(i));
            }
            report.any_budget_hit =
                report.any_budget_hit || report.trajectories[i].budget_hit;
        }
        report.metrics = pipeline::compute_metrics(opt.config, instances, report.trajectories);
        write_file(opt.output, pipeline::trajectories_to_jsonl(report));
    } else {
        report = pipeline::run_pipeline(opt.config, instances);
        write_file(opt.output, pipeline::trajectories_to_jsonl(report));
    }

    if (!opt.report_path.empty()) write_file(opt.report_path, pipeline::report_to_json(report));

    for (int idx : report.failed_instances)
        std::cerr << "instance " << idx << " failed: "
                  << report.trajectories[static_cast<std::size_t>(idx)].error_message << "\n";
    std::cout << "wrote " << opt.output << " (" << report.trajectories.size() << " instances, "
              << report.failed_instances.size() << " failed)\n";
    if (!report.failed_instances.empty()) return kExitIo;
    if (report.any_budget_hit) return kExitBudget;
    return kExitOk;
}

int run_export_lp(const std::string& input, const std::string& stage, const std::string& out_path) {
    core::Instance instance = core::load_instance(input);
    core::IncidenceData incidence = core::build_incidence(instance);
    pipeline::PipelineConfig config;
    if (stage == "1") {
        auto model = stage1::build_stage1_model(incidence, config.stage1_weights);
        write_file(out_path, bip::export_lp(model.program));
    } else {
        auto s1 = stage1::solve_stage1(instance, incidence, config.stage1_weights,
                                       config.solve_limits);
        if (s1.universe.empty())
            throw Error(ErrorKind::Data, "empty stage-1 universe; nothing to compose");
        std::vector<stage2::PoolEntry> positives, negatives;
        for (int id : s1.selected) {
            for (const auto& r : instance.pool)
                if (r.id == id) positives.push_back({id, r.results & s1.universe});
        }
        for (const auto& r : instance.pool)
            if (r.polarity == core::Polarity::Negative)
                negatives.push_back({r.id, r.results & s1.universe});
        auto model = stage2::build_stage2_model(s1.universe, instance.ground_truth, positives,
                                                negatives, config.stage2_weights);
        write_file(out_path, bip::export_lp(model.program));
    }
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int run_library_build(const std::string& trajectories_path, const std::string& out_path,
                      double sample_fraction) {
    if (sample_fraction <= 0.0 || sample_fraction > 1.0)
        throw Error(ErrorKind::Config, "--sample-fraction must be in (0, 1]");
    pipeline::PipelineConfig config;
    auto trajectories = pipeline::trajectories_from_jsonl(read_file(trajectories_path), &config);

    std::vector<const pipeline::Trajectory*> usable;
    for (const auto& t : trajectories)
        if (t.status == "ok" && t.plan) usable.push_back(&t);

    library::GoldenLibrary lib;
    const auto total = static_cast<std::int64_t>(usable.size());
    for (std::int64_t i : library::sample_indices(total, sample_fraction)) {
        const auto& t = *usable[static_cast<std::size_t>(i)];
        lib.add_case({t.query_text, t.caption}, *t.plan);
    }
    lib.save(out_path);
    std::cout << "library: " << lib.size() << " cases from " << total << " trajectories\n";
    return kExitOk;
}

int run_library_query(const std::string& lib_path, const std::string& query,
                      const std::string& caption, int n) {
    auto lib = library::GoldenLibrary::load(lib_path);
    auto hits = lib.retrieve({query, caption}, n);
    for (const auto& hit : hits) {
        char sim[32];
        std::snprintf(sim, sizeof(sim), "%.6f", hit.similarity);
        std::cout << hit.entry->id << "\t" << sim << "\t" << hit.entry->context.query_text
                  << "\t" << plan::plan_to_json(hit.entry->plan) << "\n";
    }
    return kExitOk;
}

int run_library_stats(const std::string& lib_path) {
    auto lib = library::GoldenLibrary::load(lib_path);
    std::cout << "cases: " << lib.size() << "\n";
    std::cout << "dimension: " << lib.provider().dimension() << "\n";
    std::map<std::string, int> composers;
    for (std::size_t i = 0; i < lib.size(); ++i)
        composers[lib.case_by_id(static_cast<std::int64_t>(i)).plan.composer]++;
    for (const auto& [composer, count] : composers)
        std::cout << "composer " << composer << ": " << count << "\n";
    return kExitOk;
}

int run_replay(const std::string& lib_path, const std::string& input, std::int64_t case_id,
               const std::string& report_path) {
    auto lib = library::GoldenLibrary::load(lib_path);
    std::vector<core::Instance> instances = core::load_instances(input);
    if (instances.empty()) throw Error(ErrorKind::Io, "no instances found at " + input);

    std::ostringstream out;
    out << "instance\tcase\tsimilarity\tfinal_size\tk_adjusted\tf1\n";
    Rational f1_sum(0);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const core::Instance& instance = instances[i];
        const library::Case* chosen = nullptr;
        double similarity = 1.0;
        if (case_id >= 0) {
            chosen = &lib.case_by_id(case_id);
        } else {
            auto hits = lib.retrieve({instance.query_text, instance.caption}, 1);
            if (hits.empty()) throw Error(ErrorKind::Data, "library is empty");
            chosen = hits[0].entry;
            similarity = hits[0].similarity;
        }
        pipeline::ReplayOutcome outcome = pipeline::replay_case(*chosen, instance);
        Rational f1 = eval::f1_score(outcome.final_set, instance.ground_truth);
        f1_sum += f1;
        char sim[32], f1s[32];
        std::snprintf(sim, sizeof(sim), "%.6f", similarity);
        std::snprintf(f1s, sizeof(f1s), "%.6f", f1.to_double());
        out << i << "\t" << chosen->id << "\t" << sim << "\t" << outcome.final_set.count()
            << "\t" << (outcome.k_adjusted ? 1 : 0) << "\t" << f1s << "\n";
    }
    char mean[32];
    std::snprintf(mean, sizeof(mean), "%.6f",
                  (f1_sum / Rational(static_cast<std::int64_t>(instances.size()))).to_double());
    out << "# mean_f1\t" << mean << "\n";
    if (report_path.empty())
        std::cout << out.str();
    else
        write_file(report_path, out.str());
    return kExitOk;
}

int run_eval(const std::string& input, const std::string& trajectories_path,
             const std::vector<std::string>& metric_specs, const std::string& variants_text,
             const std::string& report_path) {
    pipeline::PipelineConfig config;
    std::vector<core::Instance> instances = core::load_instances(input);
    if (instances.empty()) throw Error(ErrorKind::Io, "no instances found at " + input);

    std::vector<eval::AblationVariant> variants;
    {
        std::istringstream in(variants_text);
        std::string name;
        while (std::getline(in, name, ','))
            variants.push_back(eval::parse_ablation_variant(name));
    }
    if (variants.empty()) variants.push_back(eval::AblationVariant::Full);

    std::vector<eval::VariantMetrics> rows;
    if (!trajectories_path.empty()) {
        auto trajectories =
            pipeline::trajectories_from_jsonl(read_file(trajectories_path), &config);
        parse_metrics(metric_specs, config);
        if (trajectories.size() != instances.size())
            throw Error(ErrorKind::Data, "trajectory file does not match the instance corpus");
        for (auto variant : variants) {
            eval::VariantMetrics vm;
            vm.variant = variant;
            std::vector<eval::Ranking> rankings;
            std::vector<CandidateSet> gts;
            Rational f1_sum(0);
            for (std::size_t i = 0; i < instances.size(); ++i) {
                const auto& t = trajectories[i];
                plan::PlanDescriptor descriptor;
                if (variant == eval::AblationVariant::NoDemos || t.status != "ok" || !t.plan)
                    descriptor = pipeline::make_naive_plan(instances[i]);
                else
                    descriptor = *t.plan;
                descriptor.steps = eval::apply_variant(descriptor.steps, variant);
                auto outcome = pipeline::execute_plan(descriptor, instances[i]);
                rankings.push_back(outcome.ranking);
                gts.push_back(instances[i].ground_truth);
                f1_sum += eval::f1_score(outcome.final_set, instances[i].ground_truth);
                ++vm.instances;
            }
            vm.mean_f1 = f1_sum / Rational(vm.instances);
            for (int k : config.recall_cutoffs) {
                Rational sum(0);
                for (std::size_t q = 0; q < rankings.size(); ++q)
                    sum += eval::recall_at_k(rankings[q], gts[q], k);
                vm.recall.push_back({k, sum / Rational(vm.instances)});
            }
            for (int k : config.map_cutoffs)
                vm.map.push_back({k, eval::map_at_k(rankings, gts, k)});
            for (int k : config.ndcg_cutoffs) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rankings.size(); ++q)
                    sum += eval::ndcg_at_k(rankings[q], gts[q], k);
                vm.ndcg.push_back({k, sum / vm.instances});
            }
            rows.push_back(std::move(vm));
        }
    } else {
        parse_metrics(metric_specs, config);
        for (auto variant : variants)
            rows.push_back(eval::run_ablation(instances, variant, config));
    }

    std::string report = eval::format_ablation_report(rows, config);
    if (report_path.empty())
        std::cout << report;
    else
        write_file(report_path, report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal tool-call trajectory planning for composed retrieval"};
    app.require_subcommand(1);

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic instance corpus");
    std::string synth_config_path, synth_out;
    int synth_count = 10;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--config", synth_config_path, "generator config JSON file");
    synth_cmd->add_option("--count", synth_count, "number of instances")->required();
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    auto* seed_opt = synth_cmd->add_option("--seed", synth_seed, "override the config seed");

    OptimizeOptions opt;
    auto* optimize_cmd = app.add_subcommand("optimize", "derive optimal trajectories");
    optimize_cmd->add_option("--in", opt.input, "instance file or directory")->required();
    optimize_cmd->add_option("--out", opt.output, "output JSONL path")->required();
    optimize_cmd->add_option("--report", opt.report_path, "run report JSON path");
    optimize_cmd->add_option("--stage", opt.stage, "1, 2 or all")->default_val("all");
    optimize_cmd->add_option("--stage1", opt.stage1_path, "stage-1 solutions (with --stage 2)");
    optimize_cmd->add_option("--weights", opt.weights_text, "stage-1 weights wR,wP,lambdaDiv");
    optimize_cmd->add_option("--lambda-reg", opt.lambda_reg, "stage-2 noise penalty");
    optimize_cmd->add_option("--composer", opt.config.composer, "two_clause or dnf");
    optimize_cmd->add_option("--max-len", opt.config.clause_limits.max_len, "DNF clause length cap");
    optimize_cmd->add_option("--max-neg", opt.config.clause_limits.max_negative,
                             "DNF negated literals per clause");
    optimize_cmd->add_option("--budget", opt.config.dnf_budget, "DNF selected-clause budget");
    optimize_cmd->add_option("--threads", opt.config.threads, "worker pool size");
    optimize_cmd->add_option("--node-budget", opt.config.solve_limits.max_nodes,
                             "branch-and-bound node budget");
    optimize_cmd->add_option("--time-budget-ms", opt.config.solve_limits.time_limit_ms,
                             "per-model wall clock budget (0 = off)");

    auto* export_cmd = app.add_subcommand("export-lp", "write a compiled model in LP format");
    std::string export_in, export_stage = "1", export_out;
    export_cmd->add_option("--in", export_in, "instance file")->required();
    export_cmd->add_option("--stage", export_stage, "1 or 2")->default_val("1");
    export_cmd->add_option("--export-lp", export_out, "output LP path")->required();

    auto* library_cmd = app.add_subcommand("library", "build and query the golden library");
    library_cmd->require_subcommand(1);
    auto* build_cmd = library_cmd->add_subcommand("build", "build a library from trajectories");
    std::string lib_traj, lib_out;
    double sample_fraction = 1.0;
    build_cmd->add_option("--trajectories", lib_traj, "trajectory JSONL")->required();
    build_cmd->add_option("--out", lib_out, "library path")->required();
    build_cmd->add_option("--sample-fraction", sample_fraction, "keep this fraction of cases");
    auto* query_cmd = library_cmd->add_subcommand("query", "retrieve similar cases");
    std::string lib_path, query_text, caption_text;
    int query_n = 2;
    query_cmd->add_option("--lib", lib_path, "library path")->required();
    query_cmd->add_option("--query-text", query_text, "query text")->required();
    query_cmd->add_option("--caption", caption_text, "reference caption");
    query_cmd->add_option("-n", query_n, "cases to retrieve");
    auto* stats_cmd = library_cmd->add_subcommand("stats", "library statistics");
    std::string stats_path;
    stats_cmd->add_option("--lib", stats_path, "library path")->required();

    auto* replay_cmd = app.add_subcommand("replay", "replay stored cases on instances");
    std::string replay_lib, replay_in, replay_report;
    std::int64_t replay_case_id = -1;
    replay_cmd->add_option("--lib", replay_lib, "library path")->required();
    replay_cmd->add_option("--in", replay_in, "instance file or directory")->required();
    replay_cmd->add_option("--case", replay_case_id, "replay one case id on every instance");
    replay_cmd->add_option("--report", replay_report, "report path (default stdout)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate executed plans");
    std::string eval_in, eval_traj, eval_variants = "full", eval_report;
    std::vector<std::string> eval_metrics;
    eval_cmd->add_option("--in", eval_in, "instance file or directory")->required();
    eval_cmd->add_option("--trajectories", eval_traj, "trajectory JSONL (omit to re-solve)");
    eval_cmd->add_option("--metrics", eval_metrics,
                         "metric specs, e.g. recall@1,5,10,50 map@5,10 ndcg@10");
    eval_cmd->add_option("--variant", eval_variants,
                         "comma list of full,no_diff,union_only,no_demos");
    eval_cmd->add_option("--report", eval_report, "report path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            synth::GeneratorConfig config;
            if (!synth_config_path.empty()) config = synth::GeneratorConfig::load(synth_config_path);
            if (seed_opt->count() > 0) config.seed = synth_seed;
            config.validate();
            fs::create_directories(synth_out);
            write_file((fs::path(synth_out) / "generator_config.json").string(),
                       config.to_json() + "\n");
            for (int i = 0; i < synth_count; ++i) {
                core::Instance instance = synth::generate_instance(config, i);
                char name[64];
                std::snprintf(name, sizeof(name), "instance_%05d.jsonl", i);
                core::save_instance(instance, (fs::path(synth_out) / name).string());
            }
            std::cout << "wrote " << synth_count << " instances to " << synth_out << "\n";
            return kExitOk;
        }
        if (optimize_cmd->parsed()) return run_optimize(opt);
        if (export_cmd->parsed()) return run_export_lp(export_in, export_stage, export_out);
        if (library_cmd->parsed()) {
            if (build_cmd->parsed()) return run_library_build(lib_traj, lib_out, sample_fraction);
            if (query_cmd->parsed())
                return run_library_query(lib_path, query_text, caption_text, query_n);
            if (stats_cmd->parsed()) return run_library_stats(stats_path);
        }
        if (replay_cmd->parsed())
            return run_replay(replay_lib, replay_in, replay_case_id, replay_report);
        if (eval_cmd->parsed())
            return run_eval(eval_in, eval_traj, eval_metrics, eval_variants, eval_report);
    } catch (const Error& e) {
        std::cerr << "error (" << Error::kind_name(e.kind()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
