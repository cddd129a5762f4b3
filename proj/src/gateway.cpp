#include "kgreason/gateway.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace kgr {

std::string_view to_string(TransportStatus s) {
    switch (s) {
        case TransportStatus::success: return "success";
        case TransportStatus::transport_error: return "transport";
        case TransportStatus::http_error: return "http";
        case TransportStatus::auth_error: return "auth";
        case TransportStatus::timeout: return "timeout";
    }
    return "transport";
}

std::chrono::milliseconds RetryPolicy::delay(int attempt) const {
    auto d = backoff_base;
    for (int i = 0; i < attempt && d < backoff_cap; ++i) d *= 2;
    return std::min(d, backoff_cap);
}

EndpointConfig endpoint_config_from_env(std::string endpoint) {
    if (endpoint.empty()) throw ConfigError("no endpoint configured");
    const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("environment variable " + std::string(kApiKeyEnvVar) + " is not set");
    EndpointConfig cfg;
    cfg.endpoint = std::move(endpoint);
    cfg.api_key = key;
    return cfg;
}

OpenAIChatBackend::OpenAIChatBackend(EndpointConfig config)
    : config_(std::move(config)), sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    const auto& url = config_.endpoint;
    if (url.empty()) throw ConfigError("no endpoint configured");
    if (config_.api_key.empty()) throw ConfigError("no API key configured");
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint '" + url + "' has no scheme");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
#if !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
    if (scheme == "https") throw ConfigError("https endpoints need a build with OpenSSL support");
#endif
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    if (!path_.ends_with("/chat/completions")) path_ += "/chat/completions";
}

std::string OpenAIChatBackend::request_body(const std::string& prompt, const DecodeConfig& config) {
    nlohmann::ordered_json body;
    body["model"] = config.model_name;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config.temperature;
    body["max_tokens"] = config.max_tokens;
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

CompletionResult OpenAIChatBackend::complete(const std::string& prompt, const DecodeConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    CompletionResult out;
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    client.set_bearer_token_auth(config_.api_key);
    const auto body = request_body(prompt, config);

    for (int attempt = 0;; ++attempt) {
        out.attempts = attempt + 1;
        bool retryable = false;
        const auto sent = std::chrono::steady_clock::now();
        const auto res = client.Post(path_, body, "application/json");
        if (!res) {
            const auto err = res.error();
            const bool slow = std::chrono::steady_clock::now() - sent >= config_.timeout;
            out.status = slow && (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout)
                             ? TransportStatus::timeout
                             : TransportStatus::transport_error;
            out.error = httplib::to_string(err);
            retryable = true;
        } else if (res->status == 200) {
            const auto doc = nlohmann::json::parse(res->body, nullptr, false);
            const nlohmann::json* content = nullptr;
            if (!doc.is_discarded() && doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
                const auto& choice = doc["choices"][0];
                if (choice.contains("message") && choice["message"].contains("content"))
                    content = &choice["message"]["content"];
                else if (choice.contains("text"))
                    content = &choice["text"];
            }
            if (content == nullptr) {
                out.status = TransportStatus::http_error;
                out.error = "response has no choices[0].message.content";
                break;
            }
            out.status = TransportStatus::success;
            out.text = content->is_string() ? content->get<std::string>() : std::string{};
            out.error.clear();
            if (doc.contains("usage") && doc["usage"].is_object()) {
                TokenUsage usage;
                usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
                usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
                out.token_usage = usage;
            }
            break;
        } else if (res->status == 401 || res->status == 403) {
            out.status = TransportStatus::auth_error;
            out.error = "HTTP " + std::to_string(res->status);
        } else {
            out.status = TransportStatus::http_error;
            out.error = "HTTP " + std::to_string(res->status);
            retryable = res->status == 429 || res->status >= 500;
        }
        if (!retryable || attempt >= config_.retry.max_retries) break;
        sleep_(config_.retry.delay(attempt));
    }
    out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return out;
}

CompletionResult OracleBackend::complete(const std::string& prompt, const DecodeConfig&) {
    CompletionResult out;
    out.attempts = 1;
    out.text = oracle_complete(prompt, kg_, representation_);
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

bool FaultInjectingOracle::corrupts(const std::string& prompt) const {
    const auto bits = splitmix64(fnv1a(prompt) ^ splitmix64(seed_));
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return u < probability_;
}

CompletionResult FaultInjectingOracle::complete(const std::string& prompt, const DecodeConfig&) {
    CompletionResult out;
    out.attempts = 1;
    if (!corrupts(prompt)) {
        out.text = oracle_complete(prompt, kg_, representation_);
        return out;
    }
    auto chain = oracle_resolve(prompt, kg_);
    const auto tag = representation_.value_or(requested_representation(prompt));
    if (!chain) {
        out.text = wrap_answer_envelope("", tag, Entity{std::string(kUnknownAnswer)});
        return out;
    }
    const auto hop = std::min<std::size_t>(1, chain->hops.size() - 1);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(prompt)));
    const Entity fake{std::string(kCorruptedPrefix) + buf};
    chain->hops[hop].tail = fake;
    if (hop + 1 < chain->hops.size()) chain->hops[hop + 1].head = fake;
    ++corrupted_;
    try {
        out.text = render(*chain, tag).envelope;
    } catch (const std::exception&) {
        out.text = wrap_answer_envelope("", tag, fake);
    }
    return out;
}

std::vector<CompletionResult> complete_batch(CompletionBackend& backend, const std::vector<std::string>& prompts,
                                             const DecodeConfig& config, int concurrency,
                                             const std::function<void(std::size_t, const CompletionResult&)>& on_result) {
    std::vector<CompletionResult> results(prompts.size());
    std::atomic<std::size_t> next{0};
    std::mutex report;
    const auto worker = [&] {
        for (auto i = next.fetch_add(1); i < prompts.size(); i = next.fetch_add(1)) {
            CompletionResult r;
            try {
                r = backend.complete(prompts[i], config);
            } catch (const std::exception& e) {
                r = CompletionResult{};
                r.status = TransportStatus::transport_error;
                r.error = e.what();
            }
            if (!r.ok()) r.text.reset();
            results[i] = std::move(r);
            if (on_result) {
                std::lock_guard lock(report);
                on_result(i, results[i]);
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, concurrency));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(threads, prompts.size()); ++t) pool.emplace_back(worker);
    worker();
    pool.clear();  // join before handing results out
    return results;
}

}  // namespace kgr
