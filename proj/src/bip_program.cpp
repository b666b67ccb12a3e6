#include "setplan/bip.hpp"

#include "setplan/error.hpp"

namespace setplan::bip {

int BinaryProgram::add_variable(const std::string& name) {
    names_.push_back(name);
    objective_.push_back(Rational(0));
    return static_cast<int>(names_.size()) - 1;
}

void BinaryProgram::set_objective(int var, const Rational& coeff) {
    objective_.at(static_cast<std::size_t>(var)) = coeff;
}

void BinaryProgram::add_objective(int var, const Rational& coeff) {
    objective_.at(static_cast<std::size_t>(var)) += coeff;
}

void BinaryProgram::add_constraint(Constraint c) {
    for (const auto& t : c.terms) {
        if (t.var < 0 || t.var >= num_vars())
            throw Error(ErrorKind::Model,
                        "constraint " + c.name + " references undeclared variable");
    }
    constraints_.push_back(std::move(c));
}

Rational BinaryProgram::objective_value(const std::vector<std::uint8_t>& values) const {
    Rational v = objective_constant_;
    for (int i = 0; i < num_vars(); ++i) {
        if (values[static_cast<std::size_t>(i)])
            v += objective_[static_cast<std::size_t>(i)];
    }
    return v;
}

bool BinaryProgram::satisfies(const std::vector<std::uint8_t>& values) const {
    if (static_cast<int>(values.size()) != num_vars()) return false;
    for (const auto& c : constraints_) {
        Rational lhs(0);
        for (const auto& t : c.terms) {
            if (values[static_cast<std::size_t>(t.var)]) lhs += t.coeff;
        }
        switch (c.relation) {
            case Relation::LessEq:
                if (lhs > c.rhs) return false;
                break;
            case Relation::GreaterEq:
                if (lhs < c.rhs) return false;
                break;
            case Relation::Equal:
                if (lhs != c.rhs) return false;
                break;
        }
    }
    return true;
}

const char* solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NoSolution: return "no-solution";
    }
    return "unknown";
}

Assignment solve_bruteforce(const BinaryProgram& program, int max_vars) {
    const int n = program.num_vars();
    if (n > max_vars)
        throw Error(ErrorKind::Refusal,
                    "brute force refused: " + std::to_string(n) + " variables exceeds cap of " +
                        std::to_string(max_vars));

    Assignment best;
    best.status = SolveStatus::Infeasible;
    std::vector<std::uint8_t> values(static_cast<std::size_t>(n), 0);

    // Mask bit (n-1-i) holds variable i, so counting masks upward walks
    // assignment vectors in lexicographic order; keeping the first strict
    // maximum yields the lexicographically smallest optimal assignment.
    const std::uint64_t total = n >= 64 ? 0 : (std::uint64_t{1} << n);
    for (std::uint64_t mask = 0; mask < total || (n == 0 && mask == 0); ++mask) {
        for (int i = 0; i < n; ++i)
            values[static_cast<std::size_t>(i)] = (mask >> (n - 1 - i)) & 1;
        if (!program.satisfies(values)) {
            if (n == 0) break;
            continue;
        }
        Rational obj = program.objective_value(values);
        if (best.status == SolveStatus::Infeasible || obj > best.objective) {
            best.status = SolveStatus::Optimal;
            best.values = values;
            best.objective = obj;
            best.proven = true;
        }
        if (n == 0) break;
    }
    return best;
}

}  // namespace setplan::bip
