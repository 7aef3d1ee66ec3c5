#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slurg/corpus_stats.hpp"
#include "slurg/dataset_ops.hpp"
#include "slurg/llm_gateway.hpp"
#include "slurg/span_eval.hpp"

namespace slurg {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string command;
    std::string config_sha256;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string tool_version = kToolVersion;
    std::string timestamp;

    nlohmann::ordered_json to_json() const;
    void write(const std::filesystem::path& file) const;
};

/// Creates `dir`. An existing non-empty directory is a ConfigError unless
/// `force` is set, in which case it is emptied first.
void prepare_out_dir(const std::filesystem::path& dir, bool force);

/// Mock handler for the full pipeline: generation prompts get
/// `generation_response`, everything else is answered by echo_gold_handler.
MockTransport::Handler pipeline_mock_handler(const Corpus& gold, std::string generation_response);

/// HttpTransport or MockTransport per `config.transport.kind`. The mock kind
/// echoes `gold` and needs `mock_generation_response` to generate.
std::unique_ptr<ChatTransport> make_transport(const LlmConfig& config, const Corpus& gold);

struct PipelineConfig {
    struct CorpusInput {
        std::filesystem::path path;
        Source source = Source::Reddit;
    };

    std::vector<CorpusInput> corpora;
    std::filesystem::path annotations;
    std::size_t min_chars = 32;
    double gold_threshold = 0.8;
    std::uint64_t seed = 0;
    std::vector<std::string> splits{"100/0", "90/10", "80/20", "70/30"};
    std::size_t generation_batches = 2;
    std::size_t generation_samples = 2;
    std::size_t stats_top_k = 20;
    std::optional<std::filesystem::path> review_store;
    std::vector<std::string> reviewers;
    int likert_points = 4;
    LlmConfig llm;
    std::string checksum;  // sha256 of the config file contents

    /// Relative paths resolve against `base_dir`. Throws ConfigError.
    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static PipelineConfig load(const std::filesystem::path& path);
};

struct PipelineOptions {
    bool force = false;
    AuditLog::Clock clock;  // defaults to AuditLog::utc_now
    Sleeper sleep;
    std::function<void(const std::string& stage)> on_stage;
};

struct PipelineResult {
    std::vector<EvalReport> evals;
    std::map<std::string, Corpus> synthetic;  // by split name
    std::size_t annotation_failures = 0;
    std::size_t generation_failures = 0;
    StatsReport real_stats;
    StatsReport synthetic_stats;
    nlohmann::ordered_json report;
};

/// Runs ingest, filter, agreement, gold selection, splits, annotation and
/// evaluation, generation, statistics and the consolidated report, writing
/// every artifact under `out_dir`. A failing stage throws StageFailure and
/// leaves earlier artifacts in place.
PipelineResult pipeline_run(const PipelineConfig& config, const std::filesystem::path& out_dir,
                            const PipelineOptions& options = {});

/// Renders report.json as plain text.
std::string format_report(const nlohmann::ordered_json& report);

}  // namespace slurg
