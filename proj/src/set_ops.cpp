#include "setplan/set_ops.hpp"

#include <set>

#include <json.hpp>

#include "setplan/error.hpp"

namespace setplan::setops {

using nlohmann::json;

const char* set_op_name(SetOp op) {
    switch (op) {
        case SetOp::Union: return "UNION";
        case SetOp::Intersect: return "INTERSECT";
        case SetOp::Difference: return "DIFFERENCE";
    }
    return "?";
}

SetOp parse_set_op(const std::string& s) {
    if (s == "UNION") return SetOp::Union;
    if (s == "INTERSECT") return SetOp::Intersect;
    if (s == "DIFFERENCE") return SetOp::Difference;
    throw Error(ErrorKind::Validation, "unknown set operation: " + s);
}

void validate_steps(const StepList& steps, int num_operand_sets) {
    std::set<std::string> names;
    bool has_final = false;
    for (const auto& step : steps.steps) {
        if (step.name.empty())
            throw Error(ErrorKind::Validation, "step with empty name");
        if (!names.insert(step.name).second)
            throw Error(ErrorKind::Validation, "duplicate step name: " + step.name);
        if (step.op == SetOp::Difference) {
            if (step.operands.size() != 2)
                throw Error(ErrorKind::Validation,
                            "step " + step.name + ": DIFFERENCE takes exactly 2 operands");
        } else if (step.operands.empty()) {
            throw Error(ErrorKind::Validation,
                        "step " + step.name + ": operation needs at least one operand");
        }
        for (const auto& operand : step.operands) {
            if (std::holds_alternative<int>(operand)) {
                int idx = std::get<int>(operand);
                if (idx < 0 || idx >= num_operand_sets)
                    throw Error(ErrorKind::Validation,
                                "step " + step.name + ": operand index " + std::to_string(idx) +
                                    " out of range");
            } else {
                const std::string& ref = std::get<std::string>(operand);
                if (names.find(ref) == names.end() || ref == step.name)
                    throw Error(ErrorKind::Validation,
                                "step " + step.name + ": reference to unknown step " + ref);
            }
        }
        if (step.name == "final") has_final = true;
    }
    if (!has_final) throw Error(ErrorKind::Validation, "step list has no step named \"final\"");
}

std::map<std::string, CandidateSet> execute_steps(const StepList& steps,
                                                  const std::vector<CandidateSet>& operand_sets) {
    validate_steps(steps, static_cast<int>(operand_sets.size()));

    std::map<std::string, CandidateSet> results;
    for (const auto& step : steps.steps) {
        auto resolve = [&](const Operand& operand) -> const CandidateSet& {
            if (std::holds_alternative<int>(operand))
                return operand_sets[static_cast<std::size_t>(std::get<int>(operand))];
            return results.at(std::get<std::string>(operand));
        };
        CandidateSet value = resolve(step.operands.front());
        for (std::size_t j = 1; j < step.operands.size(); ++j) {
            const CandidateSet& rhs = resolve(step.operands[j]);
            switch (step.op) {
                case SetOp::Union: value |= rhs; break;
                case SetOp::Intersect: value &= rhs; break;
                case SetOp::Difference: value -= rhs; break;
            }
        }
        results.emplace(step.name, std::move(value));
    }
    return results;
}

CompositionStats composition_stats(const CandidateSet& before, const CandidateSet& after) {
    return {before.count() - after.count(), after.count()};
}

std::string steps_to_json(const StepList& steps) {
    json out;
    out["steps"] = json::array();
    for (const auto& step : steps.steps) {
        json s;
        s["name"] = step.name;
        s["op"] = set_op_name(step.op);
        s["operands"] = json::array();
        for (const auto& operand : step.operands) {
            if (std::holds_alternative<int>(operand))
                s["operands"].push_back(std::get<int>(operand));
            else
                s["operands"].push_back(std::get<std::string>(operand));
        }
        out["steps"].push_back(std::move(s));
    }
    return out.dump();
}

StepList steps_from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("malformed step list: ") + e.what());
    }
    StepList out;
    if (!in.contains("steps") || !in["steps"].is_array())
        throw Error(ErrorKind::Validation, "step list missing \"steps\" array");
    for (const auto& s : in["steps"]) {
        Step step;
        step.name = s.at("name").get<std::string>();
        step.op = parse_set_op(s.at("op").get<std::string>());
        for (const auto& operand : s.at("operands")) {
            if (operand.is_number_integer())
                step.operands.push_back(operand.get<int>());
            else if (operand.is_string())
                step.operands.push_back(operand.get<std::string>());
            else
                throw Error(ErrorKind::Validation,
                            "step " + step.name + ": operand must be an index or a step name");
        }
        out.steps.push_back(std::move(step));
    }
    return out;
}

}  // namespace setplan::setops
