#include "ptr/pipeline/config.hpp"

#include <fstream>
#include <memory>

#include "ptr/core/error.hpp"
#include "ptr/core/hash.hpp"
#include "ptr/tools/builtins.hpp"

namespace ptr::pipeline {

using nlohmann::json;

namespace {

const json& section(const json& j, const char* name) {
    static const json empty = json::object();
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return empty;
    if (!it->is_object()) throw Error("schema_error", std::string("config.") + name + ": expected object");
    return *it;
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw Error("schema_error", "config: expected object");
    RunConfig c;
    try {
        const auto& router = section(j, "router");
        if (router.contains("weights")) c.weights = router::RiskWeights(router["weights"].get<std::array<double, 5>>());
        c.thresholds = router::RouteThresholds(router.value("theta1", c.thresholds.theta1()),
                                               router.value("theta2", c.thresholds.theta2()));
        if (router.contains("mode_override") && !router["mode_override"].is_null()) {
            const auto name = router["mode_override"].get<std::string>();
            c.mode_override = router::mode_from_string(name);
            if (!c.mode_override) throw Error("schema_error", "config.router.mode_override: unknown mode '" + name + "'");
        }

        const auto& verifier = section(j, "verifier");
        c.coefficients.alpha_fail = verifier.value("alpha_fail", c.coefficients.alpha_fail);
        c.coefficients.alpha_empty = verifier.value("alpha_empty", c.coefficients.alpha_empty);
        c.coefficients.alpha_thin = verifier.value("alpha_thin", c.coefficients.alpha_thin);
        c.coefficients.alpha_branch = verifier.value("alpha_branch", c.coefficients.alpha_branch);
        c.coefficients.alpha_diag = verifier.value("alpha_diag", c.coefficients.alpha_diag);
        c.coefficients.validate();
        c.theta_rep = verifier.value("theta_rep", c.theta_rep);
        c.thin_output_threshold = verifier.value("thin_output_threshold", c.thin_output_threshold);

        const auto& executor = section(j, "executor");
        c.n_rec = executor.value("n_rec", c.n_rec);
        if (c.n_rec < 0) throw Error("invalid_config", "config.executor.n_rec must be non-negative");

        const auto& budget = section(j, "budget");
        if (budget.contains("limit_micros") && !budget["limit_micros"].is_null()) {
            c.budget_limit_micros = budget["limit_micros"].get<std::int64_t>();
        }

        c.seed = j.value("seed", c.seed);
        c.temperature = j.value("temperature", c.temperature);

        const auto& prices = section(j, "prices");
        c.prices.input_micros_per_token = prices.value("input_micros_per_token", std::int64_t{0});
        c.prices.output_micros_per_token = prices.value("output_micros_per_token", std::int64_t{0});

        const auto& tools = section(j, "tools");
        if (tools.contains("corpus")) c.tools.corpus = tools["corpus"];
        if (tools.contains("faults")) c.tools.faults = tools["faults"];
        c.providers = section(j, "providers");
    } catch (const json::exception& e) {
        throw Error("schema_error", std::string("config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error("schema_error", path.string() + ": " + e.what());
    }
    auto& tools = j["tools"];
    if (tools.is_null()) tools = json::object();
    if (tools.contains("kb")) {
        std::filesystem::path kb = tools["kb"].get<std::string>();
        if (kb.is_relative()) kb = path.parent_path() / kb;
        tools["corpus"] = tools::KnowledgeBase::load(kb).to_json();
        tools.erase("kb");
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json out;
    out["router"] = {{"weights", weights.values()},
                     {"theta1", thresholds.theta1()},
                     {"theta2", thresholds.theta2()},
                     {"mode_override", mode_override ? json(router::to_string(*mode_override)) : json()}};
    out["verifier"] = {{"alpha_fail", coefficients.alpha_fail},
                       {"alpha_empty", coefficients.alpha_empty},
                       {"alpha_thin", coefficients.alpha_thin},
                       {"alpha_branch", coefficients.alpha_branch},
                       {"alpha_diag", coefficients.alpha_diag},
                       {"theta_rep", theta_rep},
                       {"thin_output_threshold", thin_output_threshold}};
    out["executor"] = {{"n_rec", n_rec}};
    out["budget"] = {{"limit_micros", budget_limit_micros ? json(*budget_limit_micros) : json()}};
    out["seed"] = seed;
    out["temperature"] = temperature;
    out["prices"] = {{"input_micros_per_token", prices.input_micros_per_token},
                     {"output_micros_per_token", prices.output_micros_per_token}};
    out["tools"] = {{"corpus", tools.corpus}, {"faults", tools.faults}};
    out["providers"] = providers;
    return out;
}

std::string RunConfig::hash() const {
    return fnv1a_hex(to_json().dump());
}

executor::ExecutionConfig RunConfig::execution(router::Mode mode) const {
    return {n_rec, thin_output_threshold, mode};
}

verifier::VerifierConfig RunConfig::verification(router::Mode mode) const {
    verifier::VerifierConfig out;
    out.coefficients = coefficients;
    out.theta_rep = theta_rep;
    out.thin_output_threshold = thin_output_threshold;
    out.repair_eligible = mode == router::Mode::repair_eligible;
    return out;
}

tools::ToolRegistry build_registry(const RunConfig& config) {
    auto kb = std::make_shared<const tools::KnowledgeBase>(tools::KnowledgeBase::from_json(config.tools.corpus));
    auto registry = tools::make_builtin_registry(std::move(kb));
    tools::apply_faults(registry, config.tools.faults);
    return registry;
}

} // namespace ptr::pipeline
