#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace agctl {

struct ProviderConfig {
    std::string endpoint = "http://localhost:8000";
    std::string model = "gpt-4o";
    std::string api_key_env;  // name of the env var holding the key; never the key itself
    double temperature = 0.0;
    double top_p = 0.1;
    int max_tokens = 512;
    double timeout_s = 120.0;
    int retries = 2;

    void validate() const;
};

struct CompletionRequest {
    std::string system;
    std::string user;
    std::optional<double> temperature;
    std::optional<double> top_p;
    std::optional<int> max_tokens;
};

struct CompletionResponse {
    std::string text;
    double latency_s = 0.0;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

/// OpenAI-compatible chat-completions client. Retries transport failures
/// (connection errors, 5xx) with exponential backoff; a well-formed but
/// unparseable completion is the reprompting loop's problem, not ours.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig config);
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "http:" + config_.model; }

    /// Request body for a given request; exposed so tests can assert on the
    /// exact wire shape.
    nlohmann::json request_body(const CompletionRequest& request) const;

    int retries_used() const { return retries_used_; }

private:
    ProviderConfig config_;
    int retries_used_ = 0;
};

/// Deterministic stand-in for a model: replays a queue of scripted replies.
/// Entries may be keyed by a substring of the prompt so one script serves
/// interleaved agent roles; the first matching entry is consumed.
class ScriptedProvider : public Provider {
public:
    struct Entry {
        std::string match;  // substring of system+user; empty matches anything
        std::string reply;
        bool sticky = false;  // sticky entries are never consumed
    };

    ScriptedProvider() = default;
    explicit ScriptedProvider(std::vector<std::string> replies);
    explicit ScriptedProvider(std::vector<Entry> entries);
    ScriptedProvider(ScriptedProvider&& other) {
        std::lock_guard<std::mutex> lock(other.mutex_);
        entries_ = std::move(other.entries_);
    }

    /// Loads a JSON-lines script: {"reply": "...", "match": "...", "sticky": bool}.
    static ScriptedProvider from_jsonl(const std::string& path);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "scripted"; }
    std::size_t remaining() const;

private:
    std::string next_scripted_response(const std::string& prompt);
    mutable std::mutex mutex_;
    std::deque<Entry> entries_;
};

/// Adapter for test oracles: answers every prompt through a callback.
class FunctionProvider : public Provider {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    explicit FunctionProvider(Fn fn) : fn_(std::move(fn)) {}
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "function"; }

private:
    Fn fn_;
};

}  // namespace agctl
