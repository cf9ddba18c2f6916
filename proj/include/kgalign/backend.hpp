#pragma once

#include "kgalign/prompts.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>

namespace kgalign {

enum class BackendKind { Http, Scripted, Oracle };

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    std::string endpoint;  // e.g. http://localhost:8000 (path /v1/chat/completions)
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int max_retries = 2;       // transport retries per call
    int timeout_ms = 30000;
    int max_inflight = 8;      // concurrent HTTP request cap
    std::string api_key_env = "KGALIGN_API_KEY";
    std::string fixtures_path;      // scripted kind
    std::string default_response;   // scripted kind fallback when a hash is unknown
};

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;

    std::uint64_t total() const { return prompt_tokens + completion_tokens; }
};

struct RawAgentOutput {
    std::string text;
    TokenUsage usage;
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    // Throws Error(Backend) on failure (after internal retries for transport
    // errors). Safe for concurrent callers.
    virtual RawAgentOutput call(const std::string& prompt) = 0;
};

// Scripted fixtures: JSONL of {"prompt_sha256": ..., "response_text": ...}.
// Entries sharing a hash are consumed in file order; the last one repeats.
std::shared_ptr<AgentBackend> make_scripted_backend(const BackendConfig& cfg);

// Synthesizes perfect verdicts from a ground-truth source->target table by
// reading the rendered prompt (role header, source id, candidate ids).
std::shared_ptr<AgentBackend> make_oracle_backend(
    std::map<std::uint64_t, std::uint64_t> truth);

std::shared_ptr<AgentBackend> make_http_backend(const BackendConfig& cfg);

std::shared_ptr<AgentBackend> make_backend(
    const BackendConfig& cfg,
    const std::map<std::uint64_t, std::uint64_t>* oracle_truth = nullptr);

} // namespace kgalign
