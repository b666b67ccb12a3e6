#include "setplan/plan.hpp"

#include <json.hpp>

#include "setplan/error.hpp"

namespace setplan::plan {

using nlohmann::json;

PlanDescriptor two_clause_descriptor(const std::vector<ToolCall>& positives,
                                     const std::vector<ToolCall>& negatives) {
    if (positives.empty())
        throw Error(ErrorKind::Model, "two-clause plan needs at least one positive call");
    PlanDescriptor plan;
    plan.composer = "two_clause";
    plan.calls = positives;
    plan.calls.insert(plan.calls.end(), negatives.begin(), negatives.end());

    setops::Step pos_step;
    pos_step.name = negatives.empty() ? "final" : "positive";
    pos_step.op = setops::SetOp::Union;
    for (int j = 0; j < static_cast<int>(positives.size()); ++j)
        pos_step.operands.push_back(j);
    plan.steps.steps.push_back(std::move(pos_step));

    if (!negatives.empty()) {
        setops::Step neg_step;
        neg_step.name = "negative";
        neg_step.op = setops::SetOp::Intersect;
        for (int j = 0; j < static_cast<int>(negatives.size()); ++j)
            neg_step.operands.push_back(static_cast<int>(positives.size()) + j);
        plan.steps.steps.push_back(std::move(neg_step));

        setops::Step final_step;
        final_step.name = "final";
        final_step.op = setops::SetOp::Difference;
        final_step.operands = {std::string("positive"), std::string("negative")};
        plan.steps.steps.push_back(std::move(final_step));
    }
    return plan;
}

namespace {

json calls_to_json(const std::vector<ToolCall>& calls) {
    json arr = json::array();
    for (const auto& c : calls) {
        json j;
        j["tool"] = c.tool;
        j["query"] = c.query;
        j["polarity"] = core::polarity_name(c.polarity);
        j["k"] = c.k;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<ToolCall> calls_from_json(const json& arr) {
    std::vector<ToolCall> out;
    for (const auto& j : arr) {
        ToolCall c;
        c.tool = j.at("tool").get<std::string>();
        c.query = j.at("query").get<std::string>();
        c.polarity = core::parse_polarity(j.at("polarity").get<std::string>());
        c.k = j.at("k").get<int>();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

std::string plan_to_json(const PlanDescriptor& plan) {
    json j;
    j["composer"] = plan.composer;
    j["calls"] = calls_to_json(plan.calls);
    j["steps"] = json::parse(setops::steps_to_json(plan.steps))["steps"];
    return j.dump();
}

PlanDescriptor plan_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Data, std::string("malformed plan: ") + e.what());
    }
    PlanDescriptor plan;
    plan.composer = j.value("composer", "two_clause");
    plan.calls = calls_from_json(j.at("calls"));
    json steps;
    steps["steps"] = j.at("steps");
    plan.steps = setops::steps_from_json(steps.dump());
    return plan;
}

}  // namespace setplan::plan
