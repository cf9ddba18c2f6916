#include "kgalign/backend.hpp"

#include "kgalign/error.hpp"
#include "kgalign/hash.hpp"
#include "kgalign/tokens.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>

namespace kgalign {

namespace {

using nlohmann::json;

TokenUsage estimated_usage(const std::string& prompt, const std::string& response) {
    return {estimate_tokens(prompt), estimate_tokens(response)};
}

class ScriptedBackend : public AgentBackend {
public:
    explicit ScriptedBackend(const BackendConfig& cfg) : default_response_(cfg.default_response) {
        if (!cfg.fixtures_path.empty()) {
            std::ifstream in(cfg.fixtures_path);
            if (!in) {
                throw_config("cannot open fixtures file: " + cfg.fixtures_path);
            }
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (line.empty()) continue;
                json j = json::parse(line, nullptr, false);
                if (j.is_discarded() || !j.contains("prompt_sha256") ||
                    !j.contains("response_text")) {
                    throw_config("malformed fixture at line " + std::to_string(line_no) + " in " +
                                 cfg.fixtures_path);
                }
                fixtures_[j["prompt_sha256"].get<std::string>()].push_back(
                    j["response_text"].get<std::string>());
            }
        }
    }

    RawAgentOutput call(const std::string& prompt) override {
        std::string key = sha256_hex(prompt);
        std::string response;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = fixtures_.find(key);
            if (it != fixtures_.end()) {
                response = it->second.front();
                if (it->second.size() > 1) {
                    it->second.pop_front();
                }
            } else if (!default_response_.empty()) {
                response = default_response_;
            } else {
                throw_backend("no scripted fixture for prompt hash " + key);
            }
        }
        return {response, estimated_usage(prompt, response)};
    }

private:
    std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> fixtures_;
    std::string default_response_;
};

// Recovers role, source id and candidate ids from the rendered prompt text.
class OracleBackend : public AgentBackend {
public:
    explicit OracleBackend(std::map<std::uint64_t, std::uint64_t> truth)
        : truth_(std::move(truth)) {
        for (Role r : kAllRoles) {
            const std::string& text = PromptLibrary::builtin().text(r);
            first_lines_[static_cast<std::size_t>(r)] = text.substr(0, text.find('\n'));
        }
    }

    RawAgentOutput call(const std::string& prompt) override {
        Role role = detect_role(prompt);
        std::uint64_t source = parse_after(prompt, "Source entity (id ");
        std::vector<std::uint64_t> candidates = parse_candidates(prompt);
        if (candidates.empty()) {
            throw_backend("oracle backend: no candidates found in prompt");
        }
        auto truth_it = truth_.find(source);
        std::optional<std::uint64_t> truth;
        if (truth_it != truth_.end()) {
            truth = truth_it->second;
        }

        std::string response;
        switch (role) {
            case Role::Proponent:
            case Role::Opponent:
            case Role::Referee: {
                json arr = json::array();
                for (auto id : candidates) {
                    arr.push_back({{"candidate_id", std::to_string(id)},
                                   {"align_score", truth && *truth == id ? 1.0 : 0.0}});
                }
                response = arr.dump();
                break;
            }
            case Role::Attack: {
                json arr = json::array();
                for (auto id : candidates) {
                    arr.push_back({{"candidate_id", std::to_string(id)},
                                   {"issues", json::array()},
                                   {"evidence", ""},
                                   {"penalty", 0.0}});
                }
                response = arr.dump();
                break;
            }
            case Role::Judge: {
                bool present = truth && std::find(candidates.begin(), candidates.end(),
                                                  *truth) != candidates.end();
                json obj;
                obj["endorse"] = std::to_string(present ? *truth : candidates.front());
                obj["adjustments"] = json::array();
                obj["verdict"] = present;
                response = obj.dump();
                break;
            }
            default: {  // specialists
                json arr = json::array();
                for (auto id : candidates) {
                    bool match = truth && *truth == id;
                    arr.push_back({{"candidate_id", std::to_string(id)},
                                   {"score", match ? 1.0 : 0.0},
                                   {"align", match},
                                   {"evidence", "oracle"}});
                }
                response = arr.dump();
                break;
            }
        }
        return {response, estimated_usage(prompt, response)};
    }

private:
    Role detect_role(const std::string& prompt) const {
        for (Role r : kAllRoles) {
            const std::string& first = first_lines_[static_cast<std::size_t>(r)];
            if (prompt.compare(0, first.size(), first) == 0) {
                return r;
            }
        }
        throw_backend("oracle backend: prompt does not start with a known role header");
    }

    static std::uint64_t parse_after(const std::string& text, const std::string& marker) {
        auto pos = text.find(marker);
        if (pos == std::string::npos) {
            throw_backend("oracle backend: marker '" + marker + "' not found in prompt");
        }
        pos += marker.size();
        std::uint64_t v = 0;
        bool any = false;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            v = v * 10 + static_cast<std::uint64_t>(text[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) {
            throw_backend("oracle backend: no id after marker '" + marker + "'");
        }
        return v;
    }

    static std::vector<std::uint64_t> parse_candidates(const std::string& text) {
        std::vector<std::uint64_t> out;
        std::size_t pos = 0;
        const std::string marker = "\nCandidate ";
        while ((pos = text.find(marker, pos)) != std::string::npos) {
            pos += marker.size();
            std::uint64_t v = 0;
            bool any = false;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                v = v * 10 + static_cast<std::uint64_t>(text[pos] - '0');
                ++pos;
                any = true;
            }
            if (any && pos < text.size() && text[pos] == ':') {
                out.push_back(v);
            }
        }
        return out;
    }

    std::map<std::uint64_t, std::uint64_t> truth_;
    std::array<std::string, 9> first_lines_;
};

// Bounded in-flight counter for the HTTP backend.
class InflightGate {
public:
    explicit InflightGate(int cap) : cap_(cap) {}

    void acquire() {
        if (cap_ <= 0) return;
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [this] { return active_ < cap_; });
        ++active_;
    }

    void release() {
        if (cap_ <= 0) return;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    int cap_;
    int active_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
};

class HttpBackend : public AgentBackend {
public:
    explicit HttpBackend(const BackendConfig& cfg) : cfg_(cfg), gate_(cfg.max_inflight) {
        if (cfg_.endpoint.empty()) {
            throw_config("http backend requires an endpoint");
        }
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
            api_key_ = key;
        }
    }

    RawAgentOutput call(const std::string& prompt) override {
        gate_.acquire();
        struct Release {
            InflightGate& g;
            ~Release() { g.release(); }
        } release{gate_};

        json body;
        body["model"] = cfg_.model;
        body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
        body["temperature"] = cfg_.temperature;
        std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            httplib::Client client(cfg_.endpoint);
            client.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
            client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
            client.set_write_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
            httplib::Headers headers;
            if (!api_key_.empty()) {
                headers.emplace("Authorization", "Bearer " + api_key_);
            }
            auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;  // transport failure: retry
            }
            if (res->status < 200 || res->status >= 300) {
                throw_backend("chat completion returned status " + std::to_string(res->status));
            }
            return parse_response(prompt, res->body);
        }
        throw_backend("chat completion failed after " + std::to_string(cfg_.max_retries + 1) +
                      " attempts: " + last_error);
    }

private:
    RawAgentOutput parse_response(const std::string& prompt, const std::string& body) {
        json j = json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
            throw_backend("malformed chat completion response");
        }
        RawAgentOutput out;
        try {
            out.text = j["choices"][0]["message"]["content"].get<std::string>();
        } catch (...) {
            throw_backend("chat completion response lacks message content");
        }
        if (j.contains("usage") && j["usage"].is_object()) {
            out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0ULL);
            out.usage.completion_tokens = j["usage"].value("completion_tokens", 0ULL);
        } else {
            out.usage = estimated_usage(prompt, out.text);
        }
        return out;
    }

    BackendConfig cfg_;
    InflightGate gate_;
    std::string api_key_;
};

} // namespace

std::shared_ptr<AgentBackend> make_scripted_backend(const BackendConfig& cfg) {
    return std::make_shared<ScriptedBackend>(cfg);
}

std::shared_ptr<AgentBackend> make_oracle_backend(std::map<std::uint64_t, std::uint64_t> truth) {
    return std::make_shared<OracleBackend>(std::move(truth));
}

std::shared_ptr<AgentBackend> make_http_backend(const BackendConfig& cfg) {
    return std::make_shared<HttpBackend>(cfg);
}

std::shared_ptr<AgentBackend> make_backend(
    const BackendConfig& cfg, const std::map<std::uint64_t, std::uint64_t>* oracle_truth) {
    switch (cfg.kind) {
        case BackendKind::Scripted: return make_scripted_backend(cfg);
        case BackendKind::Http: return make_http_backend(cfg);
        case BackendKind::Oracle:
            if (!oracle_truth) {
                throw_config("oracle backend requires a ground-truth table");
            }
            return make_oracle_backend(*oracle_truth);
    }
    throw_config("unknown backend kind");
}

} // namespace kgalign
