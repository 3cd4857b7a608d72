#include "agctl/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "agctl/errors.hpp"

namespace agctl {

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

void ProviderConfig::validate() const {
    if (temperature < 0 || temperature > 2) throw OutOfRange("temperature must be in [0, 2]");
    if (top_p <= 0 || top_p > 1) throw OutOfRange("top_p must be in (0, 1]");
    if (max_tokens < 1) throw OutOfRange("max_tokens must be >= 1");
    if (timeout_s <= 0) throw OutOfRange("timeout must be positive");
    if (retries < 0) throw OutOfRange("retry count must be non-negative");
}

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
}

nlohmann::json HttpProvider::request_body(const CompletionRequest& request) const {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system.empty())
        messages.push_back({{"role", "system"}, {"content", request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    return {{"model", config_.model},
            {"messages", messages},
            {"temperature", request.temperature.value_or(config_.temperature)},
            {"top_p", request.top_p.value_or(config_.top_p)},
            {"max_tokens", request.max_tokens.value_or(config_.max_tokens)}};
}

CompletionResponse HttpProvider::complete(const CompletionRequest& request) {
    if (request.user.empty()) throw ProviderError("request user text is empty");

    httplib::Client client(config_.endpoint);
    const int timeout_whole = static_cast<int>(config_.timeout_s);
    const int timeout_usec =
        static_cast<int>((config_.timeout_s - timeout_whole) * 1e6);
    client.set_connection_timeout(timeout_whole, timeout_usec);
    client.set_read_timeout(timeout_whole, timeout_usec);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string body = request_body(request).dump();
    Stopwatch watch;
    retries_used_ = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(50 * (1 << (attempt - 1))));
            ++retries_used_;
        }
        auto result = client.Post("/v1/chat/completions", headers, body, "application/json");
        if (!result) {
            last_error = httplib::to_string(result.error());
            if (result.error() == httplib::Error::ConnectionTimeout ||
                result.error() == httplib::Error::Read) {
                if (watch.seconds() >= config_.timeout_s)
                    throw Timeout("request timed out: " + last_error);
            }
            continue;  // transport failure: retry
        }
        if (result->status >= 500) {
            last_error = "HTTP " + std::to_string(result->status);
            continue;  // server-side failure: retry
        }
        if (result->status != 200)
            throw TransportError("HTTP " + std::to_string(result->status) + ": " + result->body);
        try {
            const auto j = nlohmann::json::parse(result->body);
            CompletionResponse response;
            response.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            response.latency_s = watch.seconds();
            if (j.contains("usage")) {
                const auto& usage = j["usage"];
                if (usage.contains("prompt_tokens"))
                    response.prompt_tokens = usage["prompt_tokens"].get<int>();
                if (usage.contains("completion_tokens"))
                    response.completion_tokens = usage["completion_tokens"].get<int>();
            }
            return response;
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponse(std::string("bad completion payload: ") + e.what());
        }
    }
    throw TransportError("all attempts failed: " + last_error);
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> replies) {
    for (auto& r : replies) entries_.push_back({"", std::move(r), false});
}

ScriptedProvider::ScriptedProvider(std::vector<Entry> entries)
    : entries_(entries.begin(), entries.end()) {}

ScriptedProvider ScriptedProvider::from_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open script: " + path);
    std::vector<Entry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        entries.push_back({j.value("match", std::string{}),
                           j.at("reply").get<std::string>(),
                           j.value("sticky", false)});
    }
    return ScriptedProvider(std::move(entries));
}

std::string ScriptedProvider::next_scripted_response(const std::string& prompt) {
    std::lock_guard lock(mutex_);
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->match.empty() || prompt.find(it->match) != std::string::npos) {
            std::string reply = it->reply;
            if (!it->sticky) entries_.erase(it);
            return reply;
        }
    }
    throw ScriptExhausted("no scripted reply matches the prompt");
}

CompletionResponse ScriptedProvider::complete(const CompletionRequest& request) {
    if (request.user.empty()) throw ProviderError("request user text is empty");
    Stopwatch watch;
    CompletionResponse response;
    response.text = next_scripted_response(request.system + "\n" + request.user);
    response.latency_s = watch.seconds();
    return response;
}

std::size_t ScriptedProvider::remaining() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

CompletionResponse FunctionProvider::complete(const CompletionRequest& request) {
    if (request.user.empty()) throw ProviderError("request user text is empty");
    Stopwatch watch;
    CompletionResponse response;
    response.text = fn_(request);
    response.latency_s = watch.seconds();
    return response;
}

}  // namespace agctl
