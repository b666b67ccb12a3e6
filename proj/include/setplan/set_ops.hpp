#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "setplan/candidate_set.hpp"

namespace setplan::setops {

using setplan::CandidateSet;

enum class SetOp { Union, Intersect, Difference };

const char* set_op_name(SetOp op);
SetOp parse_set_op(const std::string& s);

// An operand is either an index into the prior tool-call results or the
// name of an earlier step.
using Operand = std::variant<int, std::string>;

struct Step {
    std::string name;
    SetOp op = SetOp::Union;
    std::vector<Operand> operands;
};

struct StepList {
    std::vector<Step> steps;
};

// Fail-fast validation: unique names, operands referencing only earlier
// results, DIFFERENCE arity exactly 2, UNION/INTERSECT arity >= 1, and a
// step named "final". Step lists come from untrusted planners at inference
// time, so diagnostics carry the offending step name.
void validate_steps(const StepList& steps, int num_operand_sets);

// Evaluates every step in order against the tool-call result sets.
// DIFFERENCE(a, b) = a \ b. The returned map includes "final".
std::map<std::string, CandidateSet> execute_steps(const StepList& steps,
                                                  const std::vector<CandidateSet>& operand_sets);

struct CompositionStats {
    int removed = 0;
    int kept = 0;
};

// Difference-reporting statistics; callers pass after as a subset of before.
CompositionStats composition_stats(const CandidateSet& before, const CandidateSet& after);

// Serialization matching the planner tool-call argument shape:
//   {"steps":[{"name":"final","op":"UNION","operands":[0,1]}]}
std::string steps_to_json(const StepList& steps);
StepList steps_from_json(const std::string& text);

}  // namespace setplan::setops
