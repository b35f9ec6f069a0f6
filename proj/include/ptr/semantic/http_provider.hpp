#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ptr/semantic/model.hpp"

namespace ptr::semantic {

struct ProviderConfig {
    std::string id;
    std::string base_url; // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    /// Name of the environment variable holding the API key. The key itself
    /// is never stored in configuration or traces.
    std::string api_key_env;
    PriceTable prices;
    int timeout_seconds = 60;

    static ProviderConfig from_json(const std::string& id, const nlohmann::json& j);
};

/// Chat-completions style JSON endpoint. Stateless apart from the call
/// counter, so one instance may serve concurrent runs.
class HttpProvider : public LanguageModel {
public:
    explicit HttpProvider(ProviderConfig config);

    const ProviderConfig& config() const { return config_; }

protected:
    ModelResponse do_complete(const ModelRequest& request) override;

private:
    ProviderConfig config_;
};

} // namespace ptr::semantic
