#pragma once

#include <string>
#include <vector>

#include "setplan/core.hpp"
#include "setplan/set_ops.hpp"

namespace setplan::plan {

// One tool call of a stored trajectory. Operand indices in the step list
// refer to positions in `calls`.
struct ToolCall {
    std::string tool;
    std::string query;
    core::Polarity polarity = core::Polarity::Positive;
    int k = 0;

    bool operator==(const ToolCall&) const = default;
};

// A replayable trajectory: the tool calls plus the set-operation steps.
// Deliberately free of image ids so it transfers across galleries.
struct PlanDescriptor {
    std::string composer;  // "two_clause", "dnf" or "union_all"
    std::vector<ToolCall> calls;
    setops::StepList steps;
};

// Canonical two-clause step list: union the positives, intersect the
// negatives (when any), then difference.
PlanDescriptor two_clause_descriptor(const std::vector<ToolCall>& positives,
                                     const std::vector<ToolCall>& negatives);

std::string plan_to_json(const PlanDescriptor& plan);
PlanDescriptor plan_from_json(const std::string& text);

}  // namespace setplan::plan
