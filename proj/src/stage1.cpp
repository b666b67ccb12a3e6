#include "setplan/stage1.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace setplan::stage1 {

using bip::Constraint;

void Stage1Weights::validate() const {
    if (!recall_weight.is_positive())
        throw Error(ErrorKind::Config, "recall weight must be positive");
    if (noise_weight.is_negative())
        throw Error(ErrorKind::Config, "noise weight must be non-negative");
    if (diversity_weight.is_negative())
        throw Error(ErrorKind::Config, "diversity weight must be non-negative");
}

Stage1Model build_stage1_model(const IncidenceData& inc, const Stage1Weights& weights) {
    weights.validate();
    if (inc.positives.empty())
        throw Error(ErrorKind::Model, "selection model needs at least one positive retrieval");

    Stage1Model m;
    auto& prog = m.program;
    const int num_pos = static_cast<int>(inc.positives.size());

    const int gt_count = inc.ground_truth.count();
    const int noise_count = inc.gallery_size - gt_count;
    const Rational gt_term = weights.recall_weight / Rational(gt_count);
    // The noise normalizer divides by the full |I-| even though indicator
    // variables exist only for images some positive retrieval can reach.
    const Rational noise_term =
        noise_count > 0 ? weights.noise_weight / Rational(noise_count) : Rational(0);

    m.select_vars.reserve(static_cast<std::size_t>(num_pos));
    for (int r = 0; r < num_pos; ++r)
        m.select_vars.push_back(prog.add_variable("x_" + std::to_string(r)));

    inc.ground_truth.for_each([&](ImageId i) {
        int v = prog.add_variable("y_" + std::to_string(i));
        prog.set_objective(v, gt_term);
        m.gt_cover_vars.push_back({i, v});
    });

    CandidateSet reachable_noise(inc.gallery_size);
    for (const auto& hits : inc.noise_hits) reachable_noise |= hits;
    reachable_noise.for_each([&](ImageId i) {
        int v = prog.add_variable("z_" + std::to_string(i));
        prog.set_objective(v, -noise_term);
        m.noise_cover_vars.push_back({i, v});
    });

    // Tool activity variables for tools with at least one positive retrieval.
    std::map<int, std::vector<int>> tool_members;  // tool index -> x vars
    for (int r = 0; r < num_pos; ++r)
        tool_members[inc.positives[static_cast<std::size_t>(r)].tool_index].push_back(
            m.select_vars[static_cast<std::size_t>(r)]);
    for (const auto& [ti, members] : tool_members) {
        int v = prog.add_variable("t_" + std::to_string(ti));
        prog.set_objective(v, weights.diversity_weight);
        m.tool_vars.push_back({inc.tools[static_cast<std::size_t>(ti)], v});

        Constraint lower;  // sum x - t >= 0
        lower.name = "tool_lo_" + std::to_string(ti);
        lower.relation = bip::Relation::GreaterEq;
        lower.rhs = Rational(0);
        Constraint upper;  // sum x - |T_f| t <= 0
        upper.name = "tool_hi_" + std::to_string(ti);
        upper.relation = bip::Relation::LessEq;
        upper.rhs = Rational(0);
        for (int x : members) {
            lower.terms.push_back({x, Rational(1)});
            upper.terms.push_back({x, Rational(1)});
        }
        lower.terms.push_back({v, Rational(-1)});
        upper.terms.push_back({v, Rational(-static_cast<std::int64_t>(members.size()))});
        prog.add_constraint(std::move(lower));
        prog.add_constraint(std::move(upper));
    }

    // Coverage links, two-sided: y_i <= sum a_ir x_r <= a_hat_i y_i, and the
    // same shape on the noise side.
    auto add_cover_links = [&](ImageId i, int cover_var, bool gt_side) {
        Constraint lower;  // sum a x - y >= 0
        lower.name = (gt_side ? "cov_lo_y" : "cov_lo_z") + std::to_string(i);
        lower.relation = bip::Relation::GreaterEq;
        lower.rhs = Rational(0);
        Constraint upper;  // sum a x - a_hat y <= 0
        upper.name = (gt_side ? "cov_hi_y" : "cov_hi_z") + std::to_string(i);
        upper.relation = bip::Relation::LessEq;
        upper.rhs = Rational(0);
        std::int64_t degree = 0;
        for (int r = 0; r < num_pos; ++r) {
            const auto& hits = gt_side ? inc.gt_hits[static_cast<std::size_t>(r)]
                                       : inc.noise_hits[static_cast<std::size_t>(r)];
            if (hits.contains(i)) {
                lower.terms.push_back({m.select_vars[static_cast<std::size_t>(r)], Rational(1)});
                upper.terms.push_back({m.select_vars[static_cast<std::size_t>(r)], Rational(1)});
                ++degree;
            }
        }
        lower.terms.push_back({cover_var, Rational(-1)});
        upper.terms.push_back({cover_var, Rational(-degree)});
        prog.add_constraint(std::move(lower));
        prog.add_constraint(std::move(upper));
    };
    for (const auto& [i, v] : m.gt_cover_vars) add_cover_links(i, v, true);
    for (const auto& [i, v] : m.noise_cover_vars) add_cover_links(i, v, false);

    // Truncation exclusivity: at most one member per positive family.
    std::map<int, int> id_to_x;
    for (int r = 0; r < num_pos; ++r)
        id_to_x[inc.positives[static_cast<std::size_t>(r)].retrieval_id] =
            m.select_vars[static_cast<std::size_t>(r)];
    for (const auto& fam : inc.families) {
        if (fam.polarity != Polarity::Positive) continue;
        Constraint c;
        c.name = "family_" + std::to_string(m.family_constraints);
        c.relation = bip::Relation::LessEq;
        c.rhs = Rational(1);
        for (int id : fam.member_ids) c.terms.push_back({id_to_x.at(id), Rational(1)});
        prog.add_constraint(std::move(c));
        ++m.family_constraints;
    }

    return m;
}

namespace {

// Rebuilds the solution from the selected sets themselves and verifies the
// solver's coverage indicators agree with true set membership.
Stage1Solution extract_solution(const Instance& instance, const IncidenceData& inc,
                                const Stage1Model& model, const bip::Assignment& assignment) {
    if (assignment.status != bip::SolveStatus::Optimal &&
        assignment.status != bip::SolveStatus::Feasible)
        throw Error(ErrorKind::Internal,
                    "selection model unexpectedly unsolved: " +
                        std::string(bip::solve_status_name(assignment.status)));

    Stage1Solution sol;
    sol.proven = assignment.proven;
    sol.nodes = assignment.nodes;
    sol.objective = assignment.objective;
    sol.universe = CandidateSet(instance.gallery_size);

    // The diversity term can make the model activate a tool through a
    // retrieval with an empty result set; such selections change neither
    // the universe nor the coverage, so they are pruned from the reported
    // selection. The objective stays the model optimum.
    for (std::size_t r = 0; r < inc.positives.size(); ++r) {
        if (!assignment.values[static_cast<std::size_t>(model.select_vars[r])]) continue;
        const auto& entry = inc.positives[r];
        const auto& results = instance.pool[static_cast<std::size_t>(entry.pool_index)].results;
        if (results.empty()) continue;
        sol.selected.push_back(entry.retrieval_id);
        sol.universe |= results;
    }
    std::sort(sol.selected.begin(), sol.selected.end());

    const int covered_gt = sol.universe.intersect_count(inc.ground_truth);
    sol.coverage = Rational(covered_gt) / Rational(inc.ground_truth.count());

    std::map<std::string, bool> tool_active;  // from the solver's own x values
    for (std::size_t r = 0; r < inc.positives.size(); ++r) {
        if (assignment.values[static_cast<std::size_t>(model.select_vars[r])])
            tool_active[inc.tools[static_cast<std::size_t>(
                inc.positives[r].tool_index)]] = true;
    }
    std::set<int> kept(sol.selected.begin(), sol.selected.end());
    for (std::size_t r = 0; r < inc.positives.size(); ++r) {
        if (kept.count(inc.positives[r].retrieval_id))
            sol.active_tools.push_back(
                inc.tools[static_cast<std::size_t>(inc.positives[r].tool_index)]);
    }
    std::sort(sol.active_tools.begin(), sol.active_tools.end());
    sol.active_tools.erase(std::unique(sol.active_tools.begin(), sol.active_tools.end()),
                           sol.active_tools.end());

    // Linkage soundness: indicator variables must match set membership.
    for (const auto& [i, v] : model.gt_cover_vars) {
        bool expect = sol.universe.contains(i);
        if (static_cast<bool>(assignment.values[static_cast<std::size_t>(v)]) != expect)
            throw Error(ErrorKind::Internal, "stage-1 ground-truth indicator out of sync");
    }
    for (const auto& [i, v] : model.noise_cover_vars) {
        bool expect = sol.universe.contains(i);
        if (static_cast<bool>(assignment.values[static_cast<std::size_t>(v)]) != expect)
            throw Error(ErrorKind::Internal, "stage-1 noise indicator out of sync");
    }
    for (const auto& [tool, v] : model.tool_vars) {
        bool expect = tool_active.count(tool) > 0;
        if (static_cast<bool>(assignment.values[static_cast<std::size_t>(v)]) != expect)
            throw Error(ErrorKind::Internal, "stage-1 tool indicator out of sync");
    }
    return sol;
}

}  // namespace

Stage1Solution solve_stage1(const Instance& instance, const IncidenceData& incidence,
                            const Stage1Weights& weights, const bip::SolveLimits& limits) {
    Stage1Model model = build_stage1_model(incidence, weights);
    bip::Assignment assignment = bip::solve_exact(model.program, limits);
    return extract_solution(instance, incidence, model, assignment);
}

Stage1Solution solve_stage1(const Instance& instance, const Stage1Weights& weights,
                            const bip::SolveLimits& limits) {
    return solve_stage1(instance, build_incidence(instance), weights, limits);
}

}  // namespace setplan::stage1
