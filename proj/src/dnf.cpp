#include "setplan/dnf.hpp"

#include <algorithm>

namespace setplan::dnf {

using bip::Constraint;

std::vector<Clause> enumerate_clauses(const CandidateSet& universe,
                                      const std::vector<PoolEntry>& positives,
                                      const std::vector<PoolEntry>& negatives,
                                      const ClauseLimits& limits) {
    if (limits.max_len < 1)
        throw Error(ErrorKind::Config, "maximum clause length must be at least 1");

    // Literal order: positives by pool position, then negatives.
    struct LiteralSet {
        Literal literal;
        CandidateSet set;
    };
    std::vector<LiteralSet> literals;
    for (const auto& p : positives) literals.push_back({{p.retrieval_id, false}, p.in_universe});
    for (const auto& n : negatives)
        literals.push_back({{n.retrieval_id, true}, universe - n.in_universe});
    const int num_literals = static_cast<int>(literals.size());
    const int num_pos = static_cast<int>(positives.size());

    std::vector<Clause> clauses;
    std::vector<int> picked;

    auto emit = [&]() {
        Clause c;
        c.extension = literals[static_cast<std::size_t>(picked.front())].set;
        for (int idx : picked) {
            c.literals.push_back(literals[static_cast<std::size_t>(idx)].literal);
            c.extension &= literals[static_cast<std::size_t>(idx)].set;
        }
        if (static_cast<int>(clauses.size()) >= limits.clause_budget)
            throw Error(ErrorKind::Refusal,
                        "clause enumeration exceeds budget of " +
                            std::to_string(limits.clause_budget) + " clauses");
        clauses.push_back(std::move(c));
    };

    // Combinations by size, lexicographic within each size.
    auto recurse = [&](auto&& self, int next, int negatives_used) -> void {
        if (!picked.empty() && picked.front() < num_pos) emit();
        if (static_cast<int>(picked.size()) == limits.max_len) return;
        for (int idx = next; idx < num_literals; ++idx) {
            bool neg = idx >= num_pos;
            if (neg && negatives_used >= limits.max_negative) continue;
            picked.push_back(idx);
            self(self, idx + 1, negatives_used + (neg ? 1 : 0));
            picked.pop_back();
        }
    };
    recurse(recurse, 0, 0);

    std::stable_sort(clauses.begin(), clauses.end(), [](const Clause& a, const Clause& b) {
        return a.literals.size() < b.literals.size();
    });
    return clauses;
}

Rational f1_of(const std::vector<int>& selection, const std::vector<Clause>& clauses,
               const CandidateSet& ground_truth) {
    if (selection.empty()) return Rational(0);
    CandidateSet result = clauses.at(static_cast<std::size_t>(selection.front())).extension;
    for (std::size_t j = 1; j < selection.size(); ++j)
        result |= clauses.at(static_cast<std::size_t>(selection[j])).extension;
    const int tp = result.intersect_count(ground_truth);
    const int fp = result.count() - tp;
    return Rational(2 * tp) / Rational(ground_truth.count() + tp + fp);
}

namespace {

struct DnfModel {
    bip::BinaryProgram program;
    std::vector<int> clause_vars;
    std::vector<std::pair<ImageId, int>> gt_vars;
    std::vector<std::pair<ImageId, int>> noise_vars;
};

// Builds the parametric model at a fixed ratio lambda:
//   maximize 2*sum y - lambda (|I+| + sum y + sum z) - alpha sum |P_c| u_c
// with two-sided clause-to-image links and the selection budget.
DnfModel build_parametric_model(const std::vector<Clause>& clauses,
                                const CandidateSet& ground_truth, int budget,
                                const Rational& lambda, const Rational& complexity_penalty) {
    DnfModel m;
    auto& prog = m.program;
    const int num_clauses = static_cast<int>(clauses.size());
    const int universe_size = ground_truth.universe_size();

    for (int c = 0; c < num_clauses; ++c) {
        int v = prog.add_variable("u_" + std::to_string(c));
        Rational penalty = complexity_penalty *
                           Rational(static_cast<std::int64_t>(
                               clauses[static_cast<std::size_t>(c)].literals.size()));
        prog.set_objective(v, -penalty);
        m.clause_vars.push_back(v);
    }

    prog.set_objective_constant(-lambda * Rational(ground_truth.count()));

    CandidateSet reachable(universe_size);
    for (const auto& c : clauses) reachable |= c.extension;
    CandidateSet reachable_gt = reachable & ground_truth;
    CandidateSet reachable_noise = reachable - ground_truth;

    auto add_image_var = [&](ImageId i, bool is_gt) {
        int v = prog.add_variable((is_gt ? "y_" : "z_") + std::to_string(i));
        prog.set_objective(v, is_gt ? Rational(2) - lambda : -lambda);
        (is_gt ? m.gt_vars : m.noise_vars).push_back({i, v});

        Constraint lower;  // sum alpha u - y >= 0
        lower.name = (is_gt ? "lo_y" : "lo_z") + std::to_string(i);
        lower.relation = bip::Relation::GreaterEq;
        lower.rhs = Rational(0);
        Constraint upper;  // sum alpha u - alpha_hat y <= 0
        upper.name = (is_gt ? "hi_y" : "hi_z") + std::to_string(i);
        upper.relation = bip::Relation::LessEq;
        upper.rhs = Rational(0);
        std::int64_t degree = 0;
        for (int c = 0; c < num_clauses; ++c) {
            if (clauses[static_cast<std::size_t>(c)].extension.contains(i)) {
                lower.terms.push_back({m.clause_vars[static_cast<std::size_t>(c)], Rational(1)});
                upper.terms.push_back({m.clause_vars[static_cast<std::size_t>(c)], Rational(1)});
                ++degree;
            }
        }
        lower.terms.push_back({v, Rational(-1)});
        upper.terms.push_back({v, Rational(-degree)});
        prog.add_constraint(std::move(lower));
        prog.add_constraint(std::move(upper));
    };
    reachable_gt.for_each([&](ImageId i) { add_image_var(i, true); });
    reachable_noise.for_each([&](ImageId i) { add_image_var(i, false); });

    Constraint cap;
    cap.name = "clause_budget";
    cap.relation = bip::Relation::LessEq;
    cap.rhs = Rational(budget);
    for (int v : m.clause_vars) cap.terms.push_back({v, Rational(1)});
    prog.add_constraint(std::move(cap));
    return m;
}

}  // namespace

DnfSolution solve_f1_dnf(const std::vector<Clause>& clauses, const CandidateSet& ground_truth,
                         int budget, const Rational& complexity_penalty,
                         const bip::SolveLimits& limits) {
    if (budget < 1) throw Error(ErrorKind::Config, "clause budget must be at least 1");
    if (complexity_penalty.is_negative())
        throw Error(ErrorKind::Config, "complexity penalty must be non-negative");

    DnfSolution sol;
    sol.result = CandidateSet(ground_truth.universe_size());
    sol.f1 = Rational(0);
    if (clauses.empty()) {
        sol.lambda_trace.push_back(Rational(0));
        return sol;
    }

    Rational lambda(0);
    std::vector<int> best_selection;
    Rational best_f1(0);
    sol.lambda_trace.push_back(lambda);

    // The ratio only takes values from a finite set of rationals and never
    // decreases, so this terminates; the cap is a safety stop.
    for (int iter = 0; iter < 200; ++iter) {
        DnfModel model =
            build_parametric_model(clauses, ground_truth, budget, lambda, complexity_penalty);
        bip::Assignment assignment = bip::solve_exact(model.program, limits);
        if (assignment.status != bip::SolveStatus::Optimal &&
            assignment.status != bip::SolveStatus::Feasible)
            throw Error(ErrorKind::Internal, "parametric model unexpectedly unsolved");

        std::vector<int> selection;
        for (int c = 0; c < static_cast<int>(clauses.size()); ++c) {
            if (assignment.values[static_cast<std::size_t>(
                    model.clause_vars[static_cast<std::size_t>(c)])])
                selection.push_back(c);
        }

        // Inclusion indicators must equal membership in the union of the
        // selected extensions.
        CandidateSet covered(ground_truth.universe_size());
        for (int c : selection) covered |= clauses[static_cast<std::size_t>(c)].extension;
        for (const auto& vars : {model.gt_vars, model.noise_vars}) {
            for (const auto& [i, v] : vars) {
                if (static_cast<bool>(assignment.values[static_cast<std::size_t>(v)]) !=
                    covered.contains(i))
                    throw Error(ErrorKind::Internal, "clause-inclusion indicator out of sync");
            }
        }

        Rational achieved = f1_of(selection, clauses, ground_truth);
        if (achieved > best_f1) {
            best_f1 = achieved;
            best_selection = selection;
        }

        Rational next = achieved > lambda ? achieved : lambda;
        sol.lambda_trace.push_back(next);
        if (next == lambda) break;
        lambda = next;
    }

    // A singleton selection is always feasible; never return less than the
    // best single clause.
    for (int c = 0; c < static_cast<int>(clauses.size()); ++c) {
        Rational single = f1_of({c}, clauses, ground_truth);
        if (single > best_f1) {
            best_f1 = single;
            best_selection = {c};
        }
    }

    sol.selected = best_selection;
    std::sort(sol.selected.begin(), sol.selected.end());
    sol.f1 = best_f1;
    if (!sol.selected.empty()) {
        sol.result = clauses[static_cast<std::size_t>(sol.selected.front())].extension;
        for (std::size_t j = 1; j < sol.selected.size(); ++j)
            sol.result |= clauses[static_cast<std::size_t>(sol.selected[j])].extension;
    }
    return sol;
}

}  // namespace setplan::dnf
