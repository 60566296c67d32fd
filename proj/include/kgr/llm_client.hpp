#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace kgr {

struct LlmMessage {
    std::string role;
    std::string content;
};

// A chat completion request. Serialization is canonical: fixed field set,
// keys in sorted order, no whitespace; two requests that differ only in
// field order or formatting hash identically.
struct LlmRequest {
    std::string model;
    std::vector<LlmMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;

    static LlmRequest single_user(std::string model, std::string prompt,
                                  double temperature = 0.0, int max_tokens = 512);
    static LlmRequest from_json(const nlohmann::json& j);

    nlohmann::json canonical_json() const;
    std::string canonical_string() const;
};

std::string request_hash(const LlmRequest& request);

// Cache identity: SHA-256 over the canonical serialization plus the trial
// index, so repeated trials of one prompt get distinct cache slots.
std::string cache_key(const LlmRequest& request, int trial);

class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string id() const = 0;
    virtual std::string complete(const LlmRequest& request) = 0;
};

struct HttpOptions {
    int max_attempts = 5;
    int backoff_base_ms = 200;
    int timeout_sec = 120;
    std::string api_key_env = "KGR_API_KEY";
};

// POSTs the canonical request body to an OpenAI-style chat endpoint and
// returns choices[0].message.content. 4xx responses fail immediately; 5xx
// and transport errors retry with exponential backoff up to max_attempts.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(const std::string& url, HttpOptions options = {});

    std::string id() const override { return url_; }
    std::string complete(const LlmRequest& request) override;

private:
    std::string url_;
    std::string base_;
    std::string path_;
    std::string api_key_;
    HttpOptions options_;
};

// Canned responses keyed by request hash; used by the mock endpoints and the
// unit tests. Unscripted requests are an EndpointError unless a default
// response is installed.
class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(std::string label = "mock:script") : label_(std::move(label)) {}

    void script(const LlmRequest& request, std::string response);
    void set_default(std::string response);

    std::string id() const override { return label_; }
    std::string complete(const LlmRequest& request) override;

    size_t calls() const { return calls_.load(); }

private:
    std::string label_;
    std::map<std::string, std::string> by_hash_;
    std::optional<std::string> default_;
    std::atomic<size_t> calls_{0};
};

struct BatchItem {
    LlmRequest request;
    int trial = 0;
};

struct BatchOutcome {
    bool ok = false;
    std::string text;
    std::string error;
    bool from_cache = false;
};

// Cache-first completion client. Every response is persisted under
// <cache_dir>/<cache_key>.json before it is returned; replay-only clients
// never touch the transport and report a cache miss as an EndpointError that
// names the missing key.
class LlmClient {
public:
    LlmClient(std::filesystem::path cache_dir, std::shared_ptr<Transport> transport,
              bool replay_only = false);

    std::string complete(const LlmRequest& request, int trial);
    BatchOutcome try_complete(const LlmRequest& request, int trial);

    // Runs items with at most max_in_flight concurrent completions. Results
    // line up with the input order and failures are isolated per item.
    std::vector<BatchOutcome> run_batch(const std::vector<BatchItem>& items, int max_in_flight);

    const std::filesystem::path& cache_dir() const { return cache_dir_; }
    bool replay_only() const { return replay_only_; }

private:
    std::filesystem::path cache_dir_;
    std::shared_ptr<Transport> transport_;
    bool replay_only_;
};

std::string summarize_failures(const std::vector<BatchOutcome>& outcomes);

} // namespace kgr
