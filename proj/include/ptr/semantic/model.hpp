#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptr::semantic {

/// react_step is used only by the reactive baseline.
enum class Role { profile, repair, reason, react_step };

struct Decoding {
    double temperature = 0.0;
    std::int64_t seed = 0;
};

struct ModelRequest {
    Role role = Role::profile;
    std::string prompt;
    Decoding decoding;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    bool operator==(const Usage&) const = default;
};

/// Costs are integer micro-dollars throughout.
struct ModelResponse {
    std::string text;
    Usage usage;
    std::int64_t cost_micros = 0;
};

/// Micro-dollars per token; lives in configuration.
struct PriceTable {
    std::int64_t input_micros_per_token = 0;
    std::int64_t output_micros_per_token = 0;

    std::int64_t cost(const Usage& usage) const;
};

/// Provider abstraction. complete() counts every call so tests can assert
/// that deterministic stages never reach the model.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;

    ModelResponse complete(const ModelRequest& request);
    std::size_t calls() const { return calls_.load(); }

protected:
    virtual ModelResponse do_complete(const ModelRequest& request) = 0;

private:
    std::atomic<std::size_t> calls_{0};
};

/// Token estimate used wherever no provider count exists: ceil(chars / 4).
std::int64_t estimate_tokens(const std::string& text);

struct ScriptEntry {
    Role role = Role::profile;
    std::string text;
    /// Skipped instead of raising role_mismatch when the request role differs.
    /// Lets one script serve runs where repair may or may not happen.
    bool optional = false;
};

/// Canned responses consumed strictly in order.
/// Errors: Error("script_exhausted"), Error("role_mismatch").
class ScriptedModel : public LanguageModel {
public:
    explicit ScriptedModel(std::vector<ScriptEntry> script, PriceTable prices = {});

    /// [{"role": "profile", "text": "...", "optional": false}, ...]; a
    /// "json" field instead of "text" is serialized compactly.
    static std::vector<ScriptEntry> parse_script(const nlohmann::json& script);

    std::size_t remaining() const;

protected:
    ModelResponse do_complete(const ModelRequest& request) override;

private:
    std::vector<ScriptEntry> script_;
    std::size_t cursor_ = 0;
    PriceTable prices_;
    mutable std::mutex mutex_;
};

struct LedgerEntry {
    Role role = Role::profile;
    int attempt = 1; // >1 only for the profile parse retry
    Usage usage;
    std::int64_t cost_micros = 0;
};

/// Append-only cost record with a budget check after every entry.
class BudgetLedger {
public:
    explicit BudgetLedger(std::optional<std::int64_t> limit_micros = std::nullopt) : limit_(limit_micros) {}

    /// Appends, then throws Error("budget_exceeded") if the cumulative cost is
    /// above the limit. The entry stays recorded either way.
    void record_and_check(Role role, const ModelResponse& response, int attempt = 1);

    const std::vector<LedgerEntry>& entries() const { return entries_; }
    std::int64_t total_micros() const { return total_; }
    Usage total_usage() const;
    std::optional<std::int64_t> limit_micros() const { return limit_; }

    /// Stage-level calls: a retried profile counts once.
    std::size_t stage_calls(Role role) const;
    std::size_t stage_calls() const;
    /// Every raw model invocation.
    std::size_t raw_calls() const { return entries_.size(); }

    nlohmann::json summary() const;

private:
    std::optional<std::int64_t> limit_;
    std::vector<LedgerEntry> entries_;
    std::int64_t total_ = 0;
};

const char* to_string(Role role);
std::optional<Role> role_from_string(const std::string& name);

/// Whole micro-dollars from a dollar amount, rounded to nearest.
std::int64_t to_micros(double dollars);

} // namespace ptr::semantic
