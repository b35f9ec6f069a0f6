#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptr/core/types.hpp"
#include "ptr/pipeline/config.hpp"
#include "ptr/pipeline/pipeline.hpp"
#include "ptr/semantic/model.hpp"
#include "ptr/tools/registry.hpp"

namespace ptr::harness {

inline constexpr int kReactMaxIterations = 8;

/// One `name[args]` action. `finish` ends the episode.
struct ReactAction {
    std::string name;
    std::string args;
};

/// Reads the action from a model response: the last line starting with
/// "Action:", else the first line that looks like `name[...]`. nullopt when
/// neither exists or the brackets are malformed.
std::optional<ReactAction> parse_react_action(const std::string& response);

struct ReactStep {
    std::string response;
    std::optional<ReactAction> action;
    std::string observation;
    bool format_error = false;
};

struct ReactReport {
    pipeline::RunOutcome outcome = pipeline::RunOutcome::completed;
    std::string error;
    std::string final_answer;
    bool finished = false; // false when the cap was hit
    std::vector<ReactStep> steps;
    std::size_t model_calls = 0;
    std::size_t tool_calls = 0;
    std::size_t format_errors = 0;
    nlohmann::json ledger;

    nlohmann::json to_json() const;
};

std::string build_react_prompt(const Task& task, const Metadata& metadata, const std::vector<ReactStep>& steps);

/// Thought/action/observation loop over the same registry and model
/// interface as the pipeline, one model call per iteration, at most
/// kReactMaxIterations. At the cap the answer is the argument of the last
/// well-formed action. budget_exceeded ends the run early; script errors
/// propagate.
ReactReport run_react_baseline(const Task& task, const Metadata& metadata, const pipeline::RunConfig& config,
                               semantic::LanguageModel& model, const tools::ToolRegistry& registry);

} // namespace ptr::harness
