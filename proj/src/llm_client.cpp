#include "kgr/llm_client.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "kgr/errors.hpp"
#include "kgr/util.hpp"

namespace kgr {

using nlohmann::json;

// ---- requests ---------------------------------------------------------------

LlmRequest LlmRequest::single_user(std::string model, std::string prompt, double temperature,
                                   int max_tokens) {
    LlmRequest request;
    request.model = std::move(model);
    request.messages.push_back({"user", std::move(prompt)});
    request.temperature = temperature;
    request.max_tokens = max_tokens;
    return request;
}

LlmRequest LlmRequest::from_json(const json& j) {
    LlmRequest request;
    request.model = j.at("model").get<std::string>();
    for (const auto& m : j.at("messages")) {
        request.messages.push_back(
            {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    if (j.contains("temperature")) {
        request.temperature = j["temperature"].get<double>();
    }
    if (j.contains("max_tokens")) {
        request.max_tokens = j["max_tokens"].get<int>();
    }
    return request;
}

json LlmRequest::canonical_json() const {
    json j;
    j["model"] = model;
    j["temperature"] = temperature;
    j["max_tokens"] = max_tokens;
    json msgs = json::array();
    for (const auto& m : messages) {
        json msg;
        msg["role"] = m.role;
        msg["content"] = m.content;
        msgs.push_back(std::move(msg));
    }
    j["messages"] = std::move(msgs);
    return j;
}

std::string LlmRequest::canonical_string() const {
    // nlohmann::json keeps object keys sorted, so dump() is already the
    // canonical byte form.
    return canonical_json().dump();
}

std::string request_hash(const LlmRequest& request) {
    return util::sha256_hex(request.canonical_string());
}

std::string cache_key(const LlmRequest& request, int trial) {
    return util::sha256_hex(request.canonical_string() + "#trial=" + std::to_string(trial));
}

// ---- HTTP transport -----------------------------------------------------------

HttpTransport::HttpTransport(const std::string& url, HttpOptions options)
    : url_(url), options_(std::move(options)) {
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw UsageError("endpoint URL must start with http:// or https://: '" + url + "'");
    }
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw UsageError("unsupported endpoint scheme '" + scheme + "'");
    }
    size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        base_ = url;
        path_ = "/";
    } else {
        base_ = url.substr(0, path_start);
        path_ = url.substr(path_start);
    }
    if (const char* key = std::getenv(options_.api_key_env.c_str())) {
        api_key_ = key;
    }
}

std::string HttpTransport::complete(const LlmRequest& request) {
    std::string body = request.canonical_string();
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    std::string last_error;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(
                static_cast<long long>(options_.backoff_base_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(base_);
        client.set_connection_timeout(options_.timeout_sec, 0);
        client.set_read_timeout(options_.timeout_sec, 0);
        client.set_write_timeout(options_.timeout_sec, 0);

        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status / 100 == 2) {
            json j = json::parse(res->body, nullptr, false);
            if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
                j["choices"].empty() || !j["choices"][0].contains("message") ||
                !j["choices"][0]["message"].contains("content") ||
                !j["choices"][0]["message"]["content"].is_string()) {
                throw EndpointError("malformed completion response from " + url_ + ": " +
                                    res->body.substr(0, 200));
            }
            return j["choices"][0]["message"]["content"].get<std::string>();
        }
        if (res->status / 100 == 4) {
            throw EndpointError("endpoint rejected request (HTTP " +
                                std::to_string(res->status) + "): " + res->body.substr(0, 500));
        }
        last_error = "HTTP " + std::to_string(res->status);
    }
    throw EndpointError("endpoint failed after " + std::to_string(options_.max_attempts) +
                        " attempts: " + last_error);
}

// ---- scripted transport ---------------------------------------------------------

void ScriptedTransport::script(const LlmRequest& request, std::string response) {
    by_hash_[request_hash(request)] = std::move(response);
}

void ScriptedTransport::set_default(std::string response) {
    default_ = std::move(response);
}

std::string ScriptedTransport::complete(const LlmRequest& request) {
    calls_.fetch_add(1);
    auto it = by_hash_.find(request_hash(request));
    if (it != by_hash_.end()) {
        return it->second;
    }
    if (default_) {
        return *default_;
    }
    throw EndpointError("unscripted request to " + label_ + ": " +
                        request.canonical_string().substr(0, 200));
}

// ---- client -------------------------------------------------------------------

LlmClient::LlmClient(std::filesystem::path cache_dir, std::shared_ptr<Transport> transport,
                     bool replay_only)
    : cache_dir_(std::move(cache_dir)), transport_(std::move(transport)),
      replay_only_(replay_only) {
    std::filesystem::create_directories(cache_dir_);
}

std::string LlmClient::complete(const LlmRequest& request, int trial) {
    std::string key = cache_key(request, trial);
    std::filesystem::path entry_path = cache_dir_ / (key + ".json");
    if (std::filesystem::exists(entry_path)) {
        json entry = json::parse(util::read_file(entry_path), nullptr, false);
        if (entry.is_discarded() || !entry.contains("response_text")) {
            throw DataError("corrupt cache entry: " + entry_path.string());
        }
        return entry["response_text"].get<std::string>();
    }
    if (replay_only_) {
        throw EndpointError("replay cache miss for key " + key);
    }
    if (!transport_) {
        throw EndpointError("no endpoint configured");
    }
    std::string text = transport_->complete(request);
    json entry;
    entry["cache_key"] = key;
    entry["trial"] = trial;
    entry["endpoint"] = transport_->id();
    entry["request"] = request.canonical_json();
    entry["response_text"] = text;
    util::write_file_atomic(entry_path, entry.dump(2) + "\n");
    return text;
}

BatchOutcome LlmClient::try_complete(const LlmRequest& request, int trial) {
    BatchOutcome outcome;
    std::string key = cache_key(request, trial);
    bool cached = std::filesystem::exists(cache_dir_ / (key + ".json"));
    try {
        outcome.text = complete(request, trial);
        outcome.ok = true;
        outcome.from_cache = cached;
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
    }
    return outcome;
}

std::vector<BatchOutcome> LlmClient::run_batch(const std::vector<BatchItem>& items,
                                               int max_in_flight) {
    if (max_in_flight < 1) {
        throw UsageError("max_in_flight must be at least 1");
    }
    std::vector<BatchOutcome> outcomes(items.size());
    std::atomic<size_t> next{0};
    size_t workers = std::min<size_t>(static_cast<size_t>(max_in_flight), items.size());
    if (workers <= 1) {
        for (size_t i = 0; i < items.size(); ++i) {
            outcomes[i] = try_complete(items[i].request, items[i].trial);
        }
        return outcomes;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= items.size()) {
                    return;
                }
                outcomes[i] = try_complete(items[i].request, items[i].trial);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return outcomes;
}

std::string summarize_failures(const std::vector<BatchOutcome>& outcomes) {
    size_t failed = 0;
    std::string first;
    for (size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok) {
            ++failed;
            if (first.empty()) {
                first = "item " + std::to_string(i) + ": " + outcomes[i].error;
            }
        }
    }
    if (failed == 0) {
        return "";
    }
    return std::to_string(failed) + "/" + std::to_string(outcomes.size()) +
           " completions failed; first failure: " + first;
}

} // namespace kgr
