#include "setplan/stage2.hpp"

#include <algorithm>

namespace setplan::stage2 {

using bip::Constraint;

void Stage2Weights::validate() const {
    if (noise_penalty.is_negative())
        throw Error(ErrorKind::Config, "noise penalty must be non-negative");
}

Stage2Model build_stage2_model(const CandidateSet& universe, const CandidateSet& ground_truth,
                               const std::vector<PoolEntry>& positives,
                               const std::vector<PoolEntry>& negatives,
                               const Stage2Weights& weights) {
    weights.validate();
    if (positives.empty())
        throw Error(ErrorKind::Model, "composition model needs a non-empty positive pool");

    Stage2Model m;
    auto& prog = m.program;

    for (std::size_t r = 0; r < positives.size(); ++r)
        m.positive_vars.push_back(prog.add_variable("x_" + std::to_string(r)));
    for (std::size_t r = 0; r < negatives.size(); ++r)
        m.negative_vars.push_back(prog.add_variable("w_" + std::to_string(r)));

    universe.for_each([&](ImageId i) {
        int e = prog.add_variable("e_" + std::to_string(i));
        prog.set_objective(e, ground_truth.contains(i) ? Rational(1) : -weights.noise_penalty);
        m.final_vars.push_back({i, e});
    });
    universe.for_each([&](ImageId i) {
        int g = prog.add_variable("g_" + std::to_string(i));
        m.negint_vars.push_back({i, g});
    });
    std::map<ImageId, int> g_of;
    for (const auto& [i, g] : m.negint_vars) g_of[i] = g;

    const int num_neg = static_cast<int>(negatives.size());
    for (const auto& [i, e] : m.final_vars) {
        int g = g_of.at(i);

        // e_i <= sum c_ir x_r and the matching lower bound
        // sum c_ir x_r <= c_hat_i (e_i + g_i), which pins e_i = 1 exactly
        // when the union covers i and the negative clause spares it.
        Constraint cover_up;
        cover_up.name = "inc_up_" + std::to_string(i);
        cover_up.relation = bip::Relation::LessEq;
        cover_up.rhs = Rational(0);
        Constraint cover_lo;
        cover_lo.name = "inc_lo_" + std::to_string(i);
        cover_lo.relation = bip::Relation::LessEq;
        cover_lo.rhs = Rational(0);
        std::int64_t degree = 0;
        for (std::size_t r = 0; r < positives.size(); ++r) {
            if (positives[r].in_universe.contains(i)) {
                cover_up.terms.push_back({m.positive_vars[r], Rational(-1)});
                cover_lo.terms.push_back({m.positive_vars[r], Rational(1)});
                ++degree;
            }
        }
        cover_up.terms.push_back({e, Rational(1)});
        prog.add_constraint(std::move(cover_up));
        if (degree > 0) {
            cover_lo.terms.push_back({e, Rational(-degree)});
            cover_lo.terms.push_back({g, Rational(-degree)});
            prog.add_constraint(std::move(cover_lo));
        }

        // e_i + g_i <= 1: anything inside the negative intersection is out.
        Constraint excl;
        excl.name = "excl_" + std::to_string(i);
        excl.relation = bip::Relation::LessEq;
        excl.rhs = Rational(1);
        excl.terms = {{e, Rational(1)}, {g, Rational(1)}};
        prog.add_constraint(std::move(excl));

        // Negative-intersection linkage. With S the selected negatives,
        // g_i = 1 iff S is non-empty and every member contains i; the
        // intersection over an empty selection excludes nothing.
        //   g_i <= sum_r w_r
        //   g_i + w_r <= 1            for each r with i outside S_r
        //   g_i >= w_r - sum_{r': i outside S_r'} w_r'   for each r containing i
        Constraint any;
        any.name = "negany_" + std::to_string(i);
        any.relation = bip::Relation::LessEq;
        any.rhs = Rational(0);
        any.terms.push_back({g, Rational(1)});
        for (int r = 0; r < num_neg; ++r)
            any.terms.push_back({m.negative_vars[static_cast<std::size_t>(r)], Rational(-1)});
        prog.add_constraint(std::move(any));

        for (int r = 0; r < num_neg; ++r) {
            const bool holds = negatives[static_cast<std::size_t>(r)].in_universe.contains(i);
            if (!holds) {
                Constraint miss;
                miss.name = "negmiss_" + std::to_string(i) + "_" + std::to_string(r);
                miss.relation = bip::Relation::LessEq;
                miss.rhs = Rational(1);
                miss.terms = {{g, Rational(1)},
                              {m.negative_vars[static_cast<std::size_t>(r)], Rational(1)}};
                prog.add_constraint(std::move(miss));
            } else {
                Constraint force;  // g - w_r + sum_{misses} w_r' >= 0
                force.name = "neghit_" + std::to_string(i) + "_" + std::to_string(r);
                force.relation = bip::Relation::GreaterEq;
                force.rhs = Rational(0);
                force.terms.push_back({g, Rational(1)});
                force.terms.push_back({m.negative_vars[static_cast<std::size_t>(r)], Rational(-1)});
                for (int r2 = 0; r2 < num_neg; ++r2) {
                    if (!negatives[static_cast<std::size_t>(r2)].in_universe.contains(i))
                        force.terms.push_back(
                            {m.negative_vars[static_cast<std::size_t>(r2)], Rational(1)});
                }
                prog.add_constraint(std::move(force));
            }
        }
    }

    // Non-empty positive clause.
    Constraint nonempty;
    nonempty.name = "nonempty_positive";
    nonempty.relation = bip::Relation::GreaterEq;
    nonempty.rhs = Rational(1);
    for (int x : m.positive_vars) nonempty.terms.push_back({x, Rational(1)});
    prog.add_constraint(std::move(nonempty));

    return m;
}

CandidateSet evaluate_two_clause(const TwoClausePlan& plan,
                                 const std::map<int, CandidateSet>& sets) {
    auto lookup = [&](int id) -> const CandidateSet& {
        auto it = sets.find(id);
        if (it == sets.end())
            throw Error(ErrorKind::Reference, "unknown retrieval id: " + std::to_string(id));
        return it->second;
    };

    if (plan.positives.empty()) throw Error(ErrorKind::Reference, "plan has no positive clause");
    CandidateSet result = lookup(plan.positives.front());
    for (std::size_t j = 1; j < plan.positives.size(); ++j) result |= lookup(plan.positives[j]);

    if (!plan.negatives.empty()) {
        CandidateSet cut = lookup(plan.negatives.front());
        for (std::size_t j = 1; j < plan.negatives.size(); ++j) cut &= lookup(plan.negatives[j]);
        result -= cut;
    }
    return result;
}

Rational score_two_clause(const CandidateSet& final_set, const CandidateSet& ground_truth,
                          const Stage2Weights& weights) {
    const int tp = final_set.intersect_count(ground_truth);
    const int fp = final_set.count() - tp;
    return Rational(tp) - weights.noise_penalty * Rational(fp);
}

Stage2Solution solve_stage2(const Instance& instance, const stage1::Stage1Solution& stage1,
                            const std::vector<int>& negatives_pool, const Stage2Weights& weights,
                            const bip::SolveLimits& limits) {
    Stage2Solution sol;
    if (stage1.universe.empty()) {
        sol.status = Stage2Status::EmptyUniverse;
        sol.plan.final_set = CandidateSet(instance.gallery_size);
        sol.objective = Rational(0);
        return sol;
    }

    std::map<int, const AtomicRetrieval*> by_id;
    for (const auto& r : instance.pool) by_id[r.id] = &r;

    std::vector<PoolEntry> positives;
    for (int id : stage1.selected) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw Error(ErrorKind::Reference, "stage-1 selection references unknown retrieval");
        positives.push_back({id, it->second->results & stage1.universe});
    }
    // The negative pool carries whole truncation families whose slices often
    // collapse once intersected with the universe. Selecting several members
    // of one nested chain equals selecting the smallest, and retrievals with
    // identical in-universe sets are interchangeable, so the solver works on
    // one representative per distinct set (lowest id) plus an exclusivity
    // row per family. The optimal objective is unchanged.
    std::vector<PoolEntry> negatives;
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> neg_families;
    {
        std::vector<int> sorted_pool = negatives_pool;
        std::sort(sorted_pool.begin(), sorted_pool.end());
        std::vector<CandidateSet> seen_sets;
        for (int id : sorted_pool) {
            auto it = by_id.find(id);
            if (it == by_id.end())
                throw Error(ErrorKind::Reference, "negative pool references unknown retrieval");
            if (it->second->polarity != Polarity::Negative)
                throw Error(ErrorKind::Data, "negative pool contains a positive retrieval");
            CandidateSet in_universe = it->second->results & stage1.universe;
            bool duplicate = false;
            for (const auto& prior : seen_sets) duplicate = duplicate || prior == in_universe;
            if (duplicate) continue;
            seen_sets.push_back(in_universe);
            neg_families[{it->second->tool, it->second->query}].push_back(negatives.size());
            negatives.push_back({id, std::move(in_universe)});
        }
    }

    Stage2Model model =
        build_stage2_model(stage1.universe, instance.ground_truth, positives, negatives, weights);
    for (const auto& [key, members] : neg_families) {
        if (members.size() < 2) continue;
        bip::Constraint chain;
        chain.name = "neg_family_" + std::to_string(members.front());
        chain.relation = bip::Relation::LessEq;
        chain.rhs = Rational(1);
        for (std::size_t m : members)
            chain.terms.push_back({model.negative_vars[m], Rational(1)});
        model.program.add_constraint(std::move(chain));
    }
    bip::Assignment assignment = bip::solve_exact(model.program, limits);
    if (assignment.status != bip::SolveStatus::Optimal &&
        assignment.status != bip::SolveStatus::Feasible)
        throw Error(ErrorKind::Internal, "composition model unexpectedly unsolved");

    sol.proven = assignment.proven;
    sol.nodes = assignment.nodes;
    sol.objective = assignment.objective;
    for (std::size_t r = 0; r < positives.size(); ++r) {
        if (assignment.values[static_cast<std::size_t>(model.positive_vars[r])])
            sol.plan.positives.push_back(positives[r].retrieval_id);
    }
    for (std::size_t r = 0; r < negatives.size(); ++r) {
        if (assignment.values[static_cast<std::size_t>(model.negative_vars[r])])
            sol.plan.negatives.push_back(negatives[r].retrieval_id);
    }
    std::sort(sol.plan.positives.begin(), sol.plan.positives.end());
    std::sort(sol.plan.negatives.begin(), sol.plan.negatives.end());

    // Recompute the final set from raw sets; it must match the solver's
    // inclusion pattern element by element.
    std::map<int, CandidateSet> sets;
    for (const auto& p : positives) sets.emplace(p.retrieval_id, p.in_universe);
    for (const auto& n : negatives) sets.emplace(n.retrieval_id, n.in_universe);
    sol.plan.final_set = evaluate_two_clause(sol.plan, sets);

    CandidateSet negint(instance.gallery_size);
    if (!sol.plan.negatives.empty()) {
        negint = sets.at(sol.plan.negatives.front());
        for (std::size_t j = 1; j < sol.plan.negatives.size(); ++j)
            negint &= sets.at(sol.plan.negatives[j]);
    }
    for (const auto& [i, e] : model.final_vars) {
        if (static_cast<bool>(assignment.values[static_cast<std::size_t>(e)]) !=
            sol.plan.final_set.contains(i))
            throw Error(ErrorKind::Internal, "stage-2 inclusion indicator out of sync");
    }
    for (const auto& [i, g] : model.negint_vars) {
        if (static_cast<bool>(assignment.values[static_cast<std::size_t>(g)]) !=
            negint.contains(i))
            throw Error(ErrorKind::Internal, "stage-2 negative-intersection indicator out of sync");
    }
    return sol;
}

}  // namespace setplan::stage2
