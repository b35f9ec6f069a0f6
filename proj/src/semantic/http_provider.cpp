#include "ptr/semantic/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>

#include "ptr/core/error.hpp"

namespace ptr::semantic {

ProviderConfig ProviderConfig::from_json(const std::string& id, const nlohmann::json& j) {
    if (!j.is_object()) throw Error("schema_error", "providers." + id + ": expected object");
    ProviderConfig config;
    config.id = id;
    try {
        config.base_url = j.at("base_url").get<std::string>();
        config.model = j.at("model").get<std::string>();
        config.path = j.value("path", config.path);
        config.api_key_env = j.value("api_key_env", std::string());
        config.timeout_seconds = j.value("timeout_seconds", config.timeout_seconds);
        if (j.contains("prices")) {
            config.prices.input_micros_per_token = j["prices"].value("input_micros_per_token", std::int64_t{0});
            config.prices.output_micros_per_token = j["prices"].value("output_micros_per_token", std::int64_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("schema_error", "providers." + id + ": " + e.what());
    }
    return config;
}

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {}

ModelResponse HttpProvider::do_complete(const ModelRequest& request) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key) {
            throw Error("provider_error", "environment variable " + config_.api_key_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const nlohmann::json body = {{"model", config_.model},
                                 {"messages", {{{"role", "user"}, {"content", request.prompt}}}},
                                 {"temperature", request.decoding.temperature},
                                 {"seed", request.decoding.seed}};
    auto result = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!result) {
        throw Error("provider_error", "request to " + config_.base_url + " failed: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw Error("provider_error", "provider returned HTTP " + std::to_string(result->status));
    }

    ModelResponse response;
    try {
        const auto reply = nlohmann::json::parse(result->body);
        response.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage")) {
            response.usage.input_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
            response.usage.output_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
        } else {
            response.usage = {estimate_tokens(request.prompt), estimate_tokens(response.text)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("provider_error", std::string("malformed provider reply: ") + e.what());
    }
    response.cost_micros = config_.prices.cost(response.usage);
    return response;
}

} // namespace ptr::semantic
