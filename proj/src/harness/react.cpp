#include "ptr/harness/react.hpp"

#include <sstream>

#include "ptr/core/error.hpp"
#include "ptr/core/json_io.hpp"
#include "ptr/executor/executor.hpp"

namespace ptr::harness {

using nlohmann::json;

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::optional<ReactAction> parse_bracketed(const std::string& line) {
    const std::string text = trim(line);
    const auto open = text.find('[');
    const auto close = text.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open || open == 0) return std::nullopt;
    if (close + 1 != text.size()) return std::nullopt;
    const std::string name = trim(text.substr(0, open));
    if (name.empty()) return std::nullopt;
    for (char c : name) {
        if (!is_name_char(c)) return std::nullopt;
    }
    return ReactAction{name, trim(text.substr(open + 1, close - open - 1))};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string describe_slot(const std::string& name, const SlotDescriptor& slot) {
    return name + (slot.required ? "" : "?");
}

/// Single-required-slot tools take the raw argument; others take a JSON object.
std::optional<ParamMap> params_for(const ToolSpec& spec, const std::string& args, std::string& error) {
    std::vector<std::string> required;
    for (const auto& [name, slot] : spec.param_schema) {
        if (slot.required) required.push_back(name);
    }
    if (!args.empty() && args.front() == '{') {
        try {
            auto parsed = json::parse(args);
            if (!parsed.is_object()) throw std::runtime_error("not an object");
            ParamMap out;
            for (auto it = parsed.begin(); it != parsed.end(); ++it) out[it.key()] = it.value();
            return out;
        } catch (const std::exception& e) {
            error = std::string("arguments are not a JSON object: ") + e.what();
            return std::nullopt;
        }
    }
    if (required.size() != 1) {
        error = "tool " + spec.id + " expects a JSON object of parameters";
        return std::nullopt;
    }
    const auto& slot = spec.param_schema.at(required.front());
    if (slot.type == SlotType::number) {
        try {
            std::size_t used = 0;
            const double number = std::stod(args, &used);
            if (used == args.size()) return ParamMap{{required.front(), number}};
        } catch (const std::exception&) {
        }
    }
    return ParamMap{{required.front(), args}};
}

std::string observe(const ToolOutcome& outcome) {
    if (const auto* ok = std::get_if<ToolSuccess>(&outcome)) return ok->value.dump();
    const auto& failure = std::get<ToolFailure>(outcome);
    return std::string("Error (") + to_string(failure.error) + "): " + failure.message;
}

} // namespace

std::optional<ReactAction> parse_react_action(const std::string& response) {
    const auto lines = lines_of(response);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        const std::string line = trim(*it);
        if (line.rfind("Action:", 0) == 0) return parse_bracketed(line.substr(7));
    }
    for (const auto& line : lines) {
        if (auto action = parse_bracketed(line)) return action;
    }
    return std::nullopt;
}

std::string build_react_prompt(const Task& task, const Metadata& metadata, const std::vector<ReactStep>& steps) {
    std::ostringstream out;
    out << "Answer the question by alternating Thought, Action and Observation steps.\n"
        << "Each reply must contain one Thought line and one Action line.\n\n"
        << "## Actions\n";
    for (const auto& spec : metadata.tool_catalog) {
        out << "- " << spec.id << "[";
        bool first = true;
        for (const auto& [name, slot] : spec.param_schema) {
            if (!first) out << ", ";
            out << describe_slot(name, slot);
            first = false;
        }
        out << "]\n";
    }
    out << "- finish[answer] ends the episode with the answer.\n"
        << "A tool with one required parameter takes it directly; otherwise pass a JSON object.\n"
        << "At most " << kReactMaxIterations << " steps are allowed.\n\n"
        << "## Question\n"
        << task.objective << "\n";
    if (task.context && !task.context->empty()) {
        json context = json::object();
        for (const auto& [k, v] : *task.context) context[k] = v;
        out << "\n## Context\n" << context.dump() << "\n";
    }
    out << "\n## Transcript\n";
    if (steps.empty()) out << "(no steps yet)\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out << "Step " << (i + 1) << ":\n" << trim(steps[i].response) << "\n";
        out << "Observation: " << steps[i].observation << "\n";
    }
    return out.str();
}

ReactReport run_react_baseline(const Task& task, const Metadata& metadata, const pipeline::RunConfig& config,
                               semantic::LanguageModel& model, const tools::ToolRegistry& registry) {
    ReactReport report;
    semantic::BudgetLedger ledger(config.budget_limit_micros);
    const ExecutionState state = executor::initial_state(task);
    std::optional<std::string> best_effort;

    try {
        for (int iteration = 0; iteration < kReactMaxIterations; ++iteration) {
            semantic::ModelRequest request{semantic::Role::react_step, build_react_prompt(task, metadata, report.steps),
                                           {config.temperature, config.seed}};
            auto response = model.complete(request);
            ledger.record_and_check(semantic::Role::react_step, response);

            ReactStep step;
            step.response = response.text;
            step.action = parse_react_action(response.text);
            if (!step.action) {
                step.format_error = true;
                ++report.format_errors;
                step.observation = "Error (format): expected an action of the form tool[args] or finish[answer].";
                report.steps.push_back(std::move(step));
                continue;
            }
            best_effort = step.action->args;
            if (step.action->name == "finish") {
                report.final_answer = step.action->args;
                report.finished = true;
                step.observation = "Episode finished.";
                report.steps.push_back(std::move(step));
                break;
            }
            const ToolSpec* spec = registry.spec(step.action->name);
            if (!spec) {
                step.observation = "Error (unknown_tool): no tool named " + step.action->name + ".";
            } else {
                std::string error;
                auto params = params_for(*spec, step.action->args, error);
                if (!params) {
                    step.observation = "Error (invalid_params): " + error;
                } else {
                    ++report.tool_calls;
                    step.observation = observe(registry.invoke(spec->id, *params, state));
                }
            }
            report.steps.push_back(std::move(step));
        }
        if (!report.finished && best_effort) report.final_answer = *best_effort;
    } catch (const Error& e) {
        if (e.code() != "budget_exceeded") throw;
        report.outcome = pipeline::RunOutcome::budget_exceeded;
        report.error = e.what();
    }
    report.model_calls = ledger.raw_calls();
    report.ledger = ledger.summary();
    return report;
}

json ReactReport::to_json() const {
    json steps_json = json::array();
    for (const auto& step : steps) {
        steps_json.push_back({{"response", step.response},
                              {"action", step.action ? json{{"name", step.action->name}, {"args", step.action->args}}
                                                     : json()},
                              {"observation", step.observation},
                              {"format_error", step.format_error}});
    }
    return {{"outcome", pipeline::to_string(outcome)},
            {"error", error},
            {"final_answer", final_answer},
            {"finished", finished},
            {"steps", steps_json},
            {"model_calls", model_calls},
            {"tool_calls", tool_calls},
            {"format_errors", format_errors},
            {"ledger", ledger}};
}

} // namespace ptr::harness
