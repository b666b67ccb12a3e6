#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "setplan/rational.hpp"

namespace setplan::bip {

using setplan::Rational;

enum class Relation { LessEq, GreaterEq, Equal };

struct LinearTerm {
    int var = 0;
    Rational coeff;
};

struct Constraint {
    std::string name;
    std::vector<LinearTerm> terms;
    Relation relation = Relation::LessEq;
    Rational rhs;
};

// A generic 0-1 linear model with exact rational coefficients, sense
// fixed to maximize. Both optimization stages and the DNF variant
// compile into this form.
class BinaryProgram {
public:
    int add_variable(const std::string& name);
    void set_objective(int var, const Rational& coeff);
    void add_objective(int var, const Rational& coeff);
    void set_objective_constant(const Rational& c) { objective_constant_ = c; }
    void add_constraint(Constraint c);

    int num_vars() const { return static_cast<int>(names_.size()); }
    const std::string& var_name(int v) const { return names_[static_cast<std::size_t>(v)]; }
    const std::vector<std::string>& var_names() const { return names_; }
    const std::vector<Rational>& objective() const { return objective_; }
    const Rational& objective_constant() const { return objective_constant_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    Rational objective_value(const std::vector<std::uint8_t>& values) const;
    bool satisfies(const std::vector<std::uint8_t>& values) const;

private:
    std::vector<std::string> names_;
    std::vector<Rational> objective_;
    Rational objective_constant_;
    std::vector<Constraint> constraints_;
};

enum class SolveStatus {
    Optimal,     // proven by bound exhaustion
    Feasible,    // best found, budget exhausted before proof
    Infeasible,  // proven infeasible
    NoSolution,  // budget exhausted with no incumbent
};

const char* solve_status_name(SolveStatus s);

struct Assignment {
    SolveStatus status = SolveStatus::NoSolution;
    std::vector<std::uint8_t> values;
    Rational objective;
    bool proven = false;
    std::uint64_t nodes = 0;
    // Objective of each successive incumbent; non-decreasing by construction.
    std::vector<Rational> incumbent_trace;
};

struct SolveLimits {
    std::uint64_t max_nodes = 10'000'000;
    std::int64_t time_limit_ms = 60'000;  // 0 disables the wall clock
};

// Exact depth-first branch-and-bound with bounds propagation over
// integer-scaled rows. Deterministic: fixed branching order (most
// constraint occurrences, then largest |objective coefficient|, then
// lowest index); the 1-branch is tried first unless the coefficient is
// negative. Returns a proven optimum unless a budget is exhausted.
Assignment solve_exact(const BinaryProgram& program, const SolveLimits& limits = {});

// Full enumeration oracle; refuses programs above `max_vars` variables.
// Ties broken to the lexicographically smallest assignment vector.
Assignment solve_bruteforce(const BinaryProgram& program, int max_vars = 20);

// Standard LP-format text (Maximize / Subject To / Binary sections).
std::string export_lp(const BinaryProgram& program);

}  // namespace setplan::bip
