#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slurg/dataset_ops.hpp"
#include "slurg/span_model.hpp"

namespace slurg {

// ------------------------------------------------------------------ prompts

struct SamplingParams {
    double temperature = 0.7;
    double top_p = 0.9;
    std::size_t max_tokens = 1024;

    static SamplingParams annotation() { return {0.7, 0.9, 1024}; }
    static SamplingParams generation() { return {1.2, 0.9, 1024}; }

    /// Throws ConfigError unless temperature > 0 and top_p is in (0, 1].
    void check() const;
};

struct PromptBundle {
    std::string system;
    std::string user;
    SamplingParams params;

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct GenerationRequest {
    Corpus fewshot;
    std::size_t num_samples = 1;
    std::vector<Tier1> fallacies;
    std::string seed_tag;  // prefix for generated sample ids
    std::string split_name;
};

/// Replaces every `{{KEY}}` from `values` in a single pass; substituted text
/// is never rescanned. Throws ConfigError when a slot has no value.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Taxonomy summary used when no guideline or definition file is given.
std::string default_guidelines();
std::string default_definitions();

/// `[credibility_fallacy, emotional_fallacy]`; `[]` for an empty list.
std::string format_fallacy_list(const std::vector<Tier1>& fallacies);

PromptBundle build_annotation_prompt(const AnnotatedSample& sample, const std::string& guidelines,
                                     const Corpus& fewshot,
                                     SamplingParams params = SamplingParams::annotation());

PromptBundle build_generation_prompt(const GenerationRequest& request, const std::string& definitions,
                                     SamplingParams params = SamplingParams::generation());

/// Uniform draws over the 8 subsets of tier-1 labels, each listed in
/// credibility, logical, emotional order.
std::vector<std::vector<Tier1>> sample_fallacy_lists(std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------- transport

struct RetryPolicy {
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

struct TransportConfig {
    std::string kind = "http";  // "http" or "mock"
    std::string endpoint;       // base URL, e.g. http://localhost:8000/v1
    std::string model;
    std::string auth_env;       // environment variable holding the bearer token
    std::chrono::seconds timeout{120};
    RetryPolicy retry;

    /// Throws ConfigError on a missing endpoint or model (http kind), or
    /// max_attempts == 0.
    void check() const;
};

/// OpenAI-compatible chat-completions request body.
nlohmann::ordered_json build_request_body(const PromptBundle& prompt, const std::string& model);

/// Sends a chat-completions body and returns the assistant message content.
/// Failures throw TransportError.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual std::string complete(const nlohmann::ordered_json& body) = 0;
};

class HttpTransport final : public ChatTransport {
public:
    /// Resolves the bearer token up front; a named but unset variable is a
    /// ConfigError.
    explicit HttpTransport(TransportConfig config);
    std::string complete(const nlohmann::ordered_json& body) override;

private:
    TransportConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::string token_;
};

/// Canned transport; every request body is recorded.
class MockTransport final : public ChatTransport {
public:
    using Handler = std::function<std::string(const nlohmann::ordered_json& body)>;

    explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}
    std::string complete(const nlohmann::ordered_json& body) override;

    std::vector<nlohmann::ordered_json> requests() const;

private:
    Handler handler_;
    mutable std::mutex mutex_;
    std::vector<nlohmann::ordered_json> requests_;
};

/// Mock handler that answers annotation prompts with the gold markup of the
/// sample whose text appears in the prompt's final `<text>` block.
MockTransport::Handler echo_gold_handler(const Corpus& gold);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Retries retryable TransportErrors with exponential backoff.
std::string complete_with_retry(ChatTransport& transport, const nlohmann::ordered_json& body,
                                const RetryPolicy& policy, const Sleeper& sleep = {});

// ---------------------------------------------------------------- audit log

struct AuditEntry {
    std::string request_id;
    std::string prompt_sha256;  // of the serialized request body
    std::string raw_response;
    std::string error;
    std::string timestamp;
};

/// Append-only JSONL log of every model exchange; writes are serialized.
class AuditLog {
public:
    using Clock = std::function<std::string()>;

    AuditLog() = default;
    explicit AuditLog(std::filesystem::path path, Clock clock = {});

    void append(AuditEntry entry);
    std::vector<AuditEntry> entries() const;

    static std::string utc_now();

private:
    std::optional<std::filesystem::path> path_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::vector<AuditEntry> entries_;
};

// ---------------------------------------------------------------- pipelines

struct BatchFailure {
    std::string id;  // sample id (annotation) or request id (generation)
    std::string reason;
    bool transport = false;  // the request itself failed after retries
};

/// Throws TransportError when every one of `total` requests failed in
/// transport; a batch with any answered request is left to the caller.
void throw_if_all_transport_failed(const std::vector<BatchFailure>& failures, std::size_t total);

struct BatchOptions {
    std::string model = "mock";
    RetryPolicy retry;
    std::size_t parallelism = 4;
    AuditLog* audit = nullptr;
    Sleeper sleep;
};

struct AnnotateResult {
    Corpus predictions;
    std::vector<BatchFailure> failures;
};

/// One request per gold sample, few-shot examples from the split. Output is
/// in gold order whatever the parallelism. Failed samples appear in
/// `predictions` with the gold text and no spans, and in `failures`.
AnnotateResult annotate_batch(const Split& split, ChatTransport& transport, const std::string& guidelines,
                              const BatchOptions& options,
                              SamplingParams params = SamplingParams::annotation());

struct GenerateResult {
    Corpus synthetic;
    std::vector<BatchFailure> failures;
};

GenerateResult generate_batch(const std::vector<GenerationRequest>& requests, ChatTransport& transport,
                              const std::string& definitions, const BatchOptions& options,
                              SamplingParams params = SamplingParams::generation());

/// Fraction of synthetic samples whose spans include every requested label.
std::optional<double> compliance_rate(const Corpus& synthetic);

// ------------------------------------------------------------------- config

struct LlmConfig {
    TransportConfig transport;
    SamplingParams annotation = SamplingParams::annotation();
    SamplingParams generation = SamplingParams::generation();
    std::size_t parallelism = 4;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> guidelines_file;
    std::optional<std::filesystem::path> definitions_file;
    std::optional<std::filesystem::path> mock_generation_response;

    /// Relative paths resolve against `base_dir`. Throws ConfigError.
    static LlmConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static LlmConfig load(const std::filesystem::path& path);
};

}  // namespace slurg
