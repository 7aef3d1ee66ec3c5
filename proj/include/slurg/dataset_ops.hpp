#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "slurg/span_model.hpp"

namespace slurg {

struct Reject {
    std::size_t line = 0;
    std::string reason;
    std::string raw;
};

struct IngestResult {
    Corpus corpus;
    std::vector<Reject> rejects;
};

struct IngestOptions {
    // Fills in records without a "source" field.
    std::optional<Source> default_source;
    // Annotation dumps carry one record per (sample, annotator) and repeat ids.
    bool unique_ids = true;
};

/// Reads JSONL samples. Lines that fail to parse or validate go to
/// `rejects`; a repeated sample_id throws SchemaViolation when ids must be
/// unique. Blank lines are skipped.
IngestResult ingest(std::istream& in, const IngestOptions& options, std::string provenance = {});
IngestResult ingest(const std::filesystem::path& path, Source source);
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options);

std::string to_jsonl(const std::vector<AnnotatedSample>& samples);
void write_jsonl(const std::filesystem::path& path, const std::vector<AnnotatedSample>& samples);
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Keeps samples strictly longer than `min_chars` characters.
Corpus filter_min_length(const Corpus& corpus, std::size_t min_chars);

/// Uniform draw of `n` samples without replacement, in draw order. Throws
/// NotEnoughSamples.
Corpus sample_annotation_batch(const Corpus& corpus, std::size_t n, std::uint64_t seed);

struct SplitSpec {
    std::string name;
    double gold_fraction = 1.0;
    double fewshot_fraction = 0.0;
    std::uint64_t seed = 0;

    /// Parses "gold/fewshot" percentages such as "80/20". Throws ConfigError.
    static SplitSpec parse(const std::string& text, std::uint64_t seed);
    /// Throws ConfigError unless both fractions are >= 0 and sum to 1.
    void check() const;
    /// round-half-up(fewshot_fraction * n)
    std::size_t fewshot_count(std::size_t n) const;
    /// Directory-safe form of the name ("80/20" -> "80_20").
    std::string dir_name() const;
};

/// 100/0, 90/10, 80/20 and 70/30.
std::vector<SplitSpec> standard_splits(std::uint64_t seed);

struct Split {
    Corpus gold;
    Corpus fewshot;
    SplitSpec spec;
};

Split make_split(const Corpus& gold_corpus, const SplitSpec& spec);

/// Writes gold.jsonl, fewshot.jsonl and split.meta.json into `dir`.
void write_split(const Split& split, const std::filesystem::path& dir);
Split read_split(const std::filesystem::path& dir);

}  // namespace slurg
