#pragma once
// Completion backends: an OpenAI-compatible chat endpoint and a built-in
// oracle that answers by exact graph traversal.

#include "kgreason/kg_core.hpp"
#include "kgreason/representation.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgr {

struct DecodeConfig {
    double temperature = 0.0;  // greedy
    int max_tokens = 512;
    std::string model_name;
};

enum class TransportStatus { success, transport_error, http_error, auth_error, timeout };

std::string_view to_string(TransportStatus s);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct CompletionResult {
    std::optional<std::string> text;  // present iff status == success
    std::chrono::milliseconds latency{0};
    std::optional<TokenUsage> token_usage;
    TransportStatus status = TransportStatus::success;
    int attempts = 0;
    std::string error;

    bool ok() const { return status == TransportStatus::success; }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    // Never throws for model-content reasons; transport problems come back
    // as a classified failure.
    virtual CompletionResult complete(const std::string& prompt, const DecodeConfig& config) = 0;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};
    std::chrono::milliseconds backoff_cap{30000};

    // Delay before retry number `attempt` (0-based): base * 2^attempt, capped.
    std::chrono::milliseconds delay(int attempt) const;
};

struct EndpointConfig {
    std::string endpoint;  // e.g. http://localhost:8000/v1
    std::string api_key;
    std::chrono::seconds timeout{120};
    RetryPolicy retry;
};

inline constexpr std::string_view kApiKeyEnvVar = "KGREASON_API_KEY";

// Reads the bearer token from the environment; throws ConfigError when the
// endpoint is empty or the token variable is unset.
EndpointConfig endpoint_config_from_env(std::string endpoint);

class OpenAIChatBackend : public CompletionBackend {
public:
    // Validates the configuration eagerly; throws ConfigError.
    explicit OpenAIChatBackend(EndpointConfig config);

    CompletionResult complete(const std::string& prompt, const DecodeConfig& config) override;

    // Test hook: replaces the sleep between retries.
    void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleep_ = std::move(sleeper); }

    static std::string request_body(const std::string& prompt, const DecodeConfig& config);

private:
    EndpointConfig config_;
    std::string scheme_host_;
    std::string path_;
    std::function<void(std::chrono::milliseconds)> sleep_;
};

// Answers a prompt produced by the prompt factory by locating the query,
// walking kg and rendering the answer envelope. Unanswerable prompts get
// Answer "UNKNOWN". Without an explicit representation the prompt's
// instruction wording decides.
std::string oracle_complete(const std::string& prompt, const KnowledgeGraph& kg,
                            std::optional<RepresentationTag> representation = std::nullopt);

// The chain the oracle would answer with, if the query can be resolved.
std::optional<ReasoningInstance> oracle_resolve(const std::string& prompt, const KnowledgeGraph& kg);

// Representation requested by a prompt, from its instruction wording and
// any demonstration it carries.
RepresentationTag requested_representation(std::string_view prompt);

inline constexpr std::string_view kUnknownAnswer = "UNKNOWN";

class OracleBackend : public CompletionBackend {
public:
    explicit OracleBackend(KnowledgeGraph kg, std::optional<RepresentationTag> representation = std::nullopt)
        : kg_(std::move(kg)), representation_(representation) {}
    CompletionResult complete(const std::string& prompt, const DecodeConfig& config) override;

private:
    KnowledgeGraph kg_;
    std::optional<RepresentationTag> representation_;
};

// Oracle that, with the given probability, replaces the second hop's tail
// by a fabricated entity before rendering. Decisions depend only on
// (seed, prompt), so they are stable under any scheduling.
class FaultInjectingOracle : public CompletionBackend {
public:
    FaultInjectingOracle(KnowledgeGraph kg, double probability, std::uint64_t seed,
                         std::optional<RepresentationTag> representation = std::nullopt)
        : kg_(std::move(kg)), probability_(probability), seed_(seed), representation_(representation) {}

    CompletionResult complete(const std::string& prompt, const DecodeConfig& config) override;

    bool corrupts(const std::string& prompt) const;
    std::size_t corrupted_count() const { return corrupted_.load(); }

private:
    KnowledgeGraph kg_;
    double probability_;
    std::uint64_t seed_;
    std::optional<RepresentationTag> representation_;
    std::atomic<std::size_t> corrupted_{0};
};

inline constexpr std::string_view kCorruptedPrefix = "Corrupted entity ";

// Runs prompts with at most `concurrency` in flight; results[i] belongs to
// prompts[i]. on_result (optional) is called under a lock as each finishes.
std::vector<CompletionResult> complete_batch(
    CompletionBackend& backend, const std::vector<std::string>& prompts, const DecodeConfig& config,
    int concurrency,
    const std::function<void(std::size_t, const CompletionResult&)>& on_result = {});

}  // namespace kgr
