#include "slurg/dataset_ops.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slurg/errors.hpp"
#include "slurg/rng.hpp"

namespace slurg {

IngestResult ingest(std::istream& in, const IngestOptions& options, std::string provenance) {
    IngestResult result;
    result.corpus.provenance = std::move(provenance);
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            result.rejects.push_back({line_no, std::string("invalid JSON: ") + e.what(), line});
            continue;
        }
        AnnotatedSample sample;
        try {
            sample = sample_from_json(j, options.default_source);
        } catch (const DataError& e) {
            result.rejects.push_back({line_no, e.what(), line});
            continue;
        }
        const auto validation = validate_sample(sample);
        if (!validation.ok()) {
            result.rejects.push_back({line_no, validation.summary(), line});
            continue;
        }
        if (options.unique_ids && !ids.insert(sample.sample_id).second)
            throw SchemaViolation(line_no, "duplicated sample_id '" + sample.sample_id + "'");
        result.corpus.samples.push_back(std::move(sample));
    }
    return result;
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open '" + path.string() + "'");
    return ingest(in, options, path.string());
}

IngestResult ingest(const std::filesystem::path& path, Source source) {
    IngestOptions options;
    options.default_source = source;
    return ingest(path, options);
}

std::string to_jsonl(const std::vector<AnnotatedSample>& samples) {
    std::string out;
    for (const auto& s : samples) {
        out += to_json(s).dump();
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<AnnotatedSample>& samples) {
    write_text(path, to_jsonl(samples));
}

Corpus filter_min_length(const Corpus& corpus, std::size_t min_chars) {
    Corpus out;
    out.provenance = corpus.provenance;
    for (const auto& s : corpus.samples)
        if (s.char_length() > min_chars) out.samples.push_back(s);
    return out;
}

Corpus sample_annotation_batch(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
    if (n > corpus.size())
        throw NotEnoughSamples("requested " + std::to_string(n) + " samples from a corpus of " +
                               std::to_string(corpus.size()));
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    // Partial Fisher-Yates: position i receives a uniform pick from the rest.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.uniform_index(order.size() - i);
        std::swap(order[i], order[j]);
    }
    Corpus out;
    out.provenance = corpus.provenance + " | batch(n=" + std::to_string(n) + ", seed=" +
                     std::to_string(seed) + ")";
    for (std::size_t i = 0; i < n; ++i) out.samples.push_back(corpus.samples[order[i]]);
    return out;
}

SplitSpec SplitSpec::parse(const std::string& text, std::uint64_t seed) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) throw ConfigError("split spec '" + text + "' is not gold/fewshot");
    double gold = 0, fewshot = 0;
    try {
        std::size_t used = 0;
        gold = std::stod(text.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument("trailing");
        const auto rest = text.substr(slash + 1);
        fewshot = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
        throw ConfigError("split spec '" + text + "' is not numeric");
    }
    if (gold < 0 || fewshot < 0 || gold + fewshot <= 0)
        throw ConfigError("split spec '" + text + "' must have non-negative parts");
    SplitSpec spec;
    spec.name = text;
    spec.gold_fraction = gold / (gold + fewshot);
    spec.fewshot_fraction = fewshot / (gold + fewshot);
    spec.seed = seed;
    return spec;
}

void SplitSpec::check() const {
    if (gold_fraction < 0 || fewshot_fraction < 0)
        throw ConfigError("split '" + name + "' has a negative fraction");
    if (std::abs(gold_fraction + fewshot_fraction - 1.0) > 1e-9)
        throw ConfigError("split '" + name + "' fractions do not sum to 1");
}

std::size_t SplitSpec::fewshot_count(std::size_t n) const {
    // The epsilon absorbs representation error such as 0.3 * 10 = 2.9999...
    const double raw = std::floor(fewshot_fraction * static_cast<double>(n) + 0.5 + 1e-9);
    return std::min(n, static_cast<std::size_t>(std::max(0.0, raw)));
}

std::string SplitSpec::dir_name() const {
    std::string out = name;
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return out;
}

std::vector<SplitSpec> standard_splits(std::uint64_t seed) {
    std::vector<SplitSpec> out;
    for (const char* name : {"100/0", "90/10", "80/20", "70/30"}) out.push_back(SplitSpec::parse(name, seed));
    return out;
}

Split make_split(const Corpus& gold_corpus, const SplitSpec& spec) {
    spec.check();
    const std::size_t n = gold_corpus.size();
    const std::size_t k = spec.fewshot_count(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(order[i], order[j]);
    }
    std::vector<bool> is_fewshot(n, false);
    for (std::size_t i = 0; i < k; ++i) is_fewshot[order[i]] = true;

    Split split;
    split.spec = spec;
    split.gold.provenance = gold_corpus.provenance + " | split " + spec.name + " gold";
    split.fewshot.provenance = gold_corpus.provenance + " | split " + spec.name + " fewshot";
    for (std::size_t i = 0; i < n; ++i)
        (is_fewshot[i] ? split.fewshot : split.gold).samples.push_back(gold_corpus.samples[i]);
    return split;
}

void write_split(const Split& split, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_jsonl(dir / "gold.jsonl", split.gold.samples);
    write_jsonl(dir / "fewshot.jsonl", split.fewshot.samples);
    nlohmann::ordered_json meta;
    meta["name"] = split.spec.name;
    meta["gold_fraction"] = split.spec.gold_fraction;
    meta["fewshot_fraction"] = split.spec.fewshot_fraction;
    meta["seed"] = split.spec.seed;
    meta["gold_count"] = split.gold.size();
    meta["fewshot_count"] = split.fewshot.size();
    write_text(dir / "split.meta.json", meta.dump(2) + "\n");
}

Split read_split(const std::filesystem::path& dir) {
    Split split;
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text(dir / "split.meta.json"));
        split.spec.name = meta.at("name").get<std::string>();
        split.spec.gold_fraction = meta.at("gold_fraction").get<double>();
        split.spec.fewshot_fraction = meta.at("fewshot_fraction").get<double>();
        split.spec.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad split.meta.json in '" + dir.string() + "': " + e.what());
    }
    auto load = [&](const char* file) {
        auto r = ingest(dir / file, IngestOptions{});
        if (!r.rejects.empty())
            throw SchemaViolation(r.rejects.front().line,
                                  (dir / file).string() + ": " + r.rejects.front().reason);
        return std::move(r.corpus);
    };
    split.gold = load("gold.jsonl");
    split.fewshot = load("fewshot.jsonl");
    return split;
}

}  // namespace slurg
