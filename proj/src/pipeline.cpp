#include "slurg/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "slurg/agreement.hpp"
#include "slurg/errors.hpp"
#include "slurg/hash.hpp"
#include "slurg/prompt_templates.hpp"
#include "slurg/review_service.hpp"

namespace slurg {

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_sha256"] = config_sha256;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["tool_version"] = tool_version;
    j["timestamp"] = timestamp;
    return j;
}

void RunManifest::write(const std::filesystem::path& file) const {
    write_text(file, to_json().dump(2) + "\n");
}

void prepare_out_dir(const std::filesystem::path& dir, bool force) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec)) throw ConfigError("'" + dir.string() + "' exists and is not a directory");
        if (!fs::is_empty(dir, ec)) {
            if (!force) throw ConfigError("output directory '" + dir.string() + "' is not empty (use --force)");
            for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
        }
    }
    fs::create_directories(dir, ec);
    if (ec) throw IoFailure("cannot create '" + dir.string() + "': " + ec.message());
}

MockTransport::Handler pipeline_mock_handler(const Corpus& gold, std::string generation_response) {
    auto echo = echo_gold_handler(gold);
    return [echo, response = std::move(generation_response)](const nlohmann::ordered_json& body) {
        const auto& system = body.at("messages").at(0).at("content").get_ref<const std::string&>();
        if (system == templates::kGenerationSystemPrompt) return response;
        return echo(body);
    };
}

std::unique_ptr<ChatTransport> make_transport(const LlmConfig& config, const Corpus& gold) {
    config.transport.check();
    if (config.transport.kind == "mock") {
        std::string response;
        if (config.mock_generation_response) response = read_text(*config.mock_generation_response);
        return std::make_unique<MockTransport>(pipeline_mock_handler(gold, std::move(response)));
    }
    return std::make_unique<HttpTransport>(config.transport);
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

Source parse_source(const std::string& s) {
    auto src = source_from_string(s);
    if (!src) throw ConfigError("unknown source '" + s + "'");
    return *src;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    try {
        for (const auto& c : j.value("corpora", nlohmann::json::array()))
            cfg.corpora.push_back({resolve(base_dir, c.at("path").get<std::string>()),
                                   parse_source(c.value("source", std::string("reddit")))});
        if (!j.contains("annotations")) throw ConfigError("config needs an 'annotations' file");
        cfg.annotations = resolve(base_dir, j.at("annotations").get<std::string>());
        cfg.min_chars = j.value("min_chars", cfg.min_chars);
        cfg.gold_threshold = j.value("gold_threshold", cfg.gold_threshold);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("splits")) cfg.splits = j.at("splits").get<std::vector<std::string>>();
        if (j.contains("generation")) {
            const auto& g = j.at("generation");
            cfg.generation_batches = g.value("batches", cfg.generation_batches);
            cfg.generation_samples = g.value("num_samples", cfg.generation_samples);
        }
        cfg.stats_top_k = j.value("stats_top_k", cfg.stats_top_k);
        if (j.contains("review")) {
            const auto& r = j.at("review");
            cfg.review_store = resolve(base_dir, r.at("store").get<std::string>());
            cfg.reviewers = r.value("reviewers", std::vector<std::string>{});
            cfg.likert_points = r.value("likert_points", cfg.likert_points);
        }
        cfg.llm = LlmConfig::from_json(j.value("llm", nlohmann::json::object()), base_dir);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad pipeline config: ") + e.what());
    }
    if (cfg.gold_threshold < 0.0 || cfg.gold_threshold > 1.0) throw ConfigError("gold_threshold must be in [0, 1]");
    if (cfg.splits.empty()) throw ConfigError("at least one split is required");
    for (const auto& s : cfg.splits) SplitSpec::parse(s, cfg.seed);
    if (cfg.llm.transport.kind == "mock" && !cfg.llm.mock_generation_response)
        throw ConfigError("mock transport needs transport.mock_generation_response");
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    auto cfg = from_json(j, path.parent_path());
    cfg.checksum = sha256_hex(buf.str());
    return cfg;
}

namespace {

std::string load_or(const std::optional<std::filesystem::path>& file, std::string fallback) {
    return file ? read_text(*file) : fallback;
}

nlohmann::ordered_json rejects_json(const std::vector<Reject>& rejects) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rejects) arr.push_back({{"line", r.line}, {"reason", r.reason}});
    return arr;
}

nlohmann::ordered_json failures_json(const std::vector<BatchFailure>& failures) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : failures) arr.push_back({{"id", f.id}, {"reason", f.reason}});
    return arr;
}

void write_stats(const StatsReport& stats, const std::filesystem::path& dir, const std::string& name) {
    write_text(dir / (name + ".json"), stats.to_json().dump(2) + "\n");
    write_text(dir / (name + "_hapax.csv"), stats.hapax_csv());
    write_text(dir / (name + "_phrases.csv"), stats.phrase_csv());
}

class StageRunner {
public:
    explicit StageRunner(const PipelineOptions& options) : options_(options) {}

    template <typename Fn>
    auto operator()(const std::string& stage, Fn&& fn) {
        if (options_.on_stage) options_.on_stage(stage);
        try {
            return fn();
        } catch (const StageFailure&) {
            throw;
        } catch (const Error& e) {
            throw StageFailure(stage, e);
        } catch (const std::exception& e) {
            throw StageFailure(stage, DataError(e.what()));
        }
    }

private:
    const PipelineOptions& options_;
};

}  // namespace

PipelineResult pipeline_run(const PipelineConfig& config, const std::filesystem::path& out_dir,
                            const PipelineOptions& options) {
    namespace fs = std::filesystem;
    const auto clock = options.clock ? options.clock : AuditLog::Clock(&AuditLog::utc_now);
    StageRunner stage(options);
    PipelineResult result;

    RunManifest manifest;
    manifest.command = "pipeline";
    manifest.config_sha256 = config.checksum;
    manifest.seeds = {{"pipeline", config.seed}, {"llm", config.llm.seed}};
    for (const auto& c : config.corpora) manifest.inputs.push_back(c.path.string());
    manifest.inputs.push_back(config.annotations.string());
    manifest.timestamp = clock();

    stage("prepare", [&] { prepare_out_dir(out_dir, options.force); });

    // Raw corpora feed the real-data statistics; annotations feed agreement.
    Corpus filtered;
    std::vector<AnnotatedSample> annotations;
    stage("ingest", [&] {
        Corpus all;
        nlohmann::ordered_json rejects;
        for (const auto& c : config.corpora) {
            auto r = ingest(c.path, c.source);
            rejects[c.path.filename().string()] = rejects_json(r.rejects);
            for (auto& s : r.corpus.samples) all.samples.push_back(std::move(s));
        }
        if (auto dup = all.duplicate_id()) throw SchemaViolation(0, "sample '" + *dup + "' appears in two corpora");
        IngestOptions ann_opts;
        ann_opts.default_source = Source::Reddit;
        ann_opts.unique_ids = false;
        auto ann = ingest(config.annotations, ann_opts);
        rejects[config.annotations.filename().string()] = rejects_json(ann.rejects);
        annotations = std::move(ann.corpus.samples);
        write_jsonl(out_dir / "01_ingest" / "corpus.jsonl", all.samples);
        write_text(out_dir / "01_ingest" / "rejects.json", rejects.dump(2) + "\n");
        filtered = std::move(all);
    });

    stage("filter", [&] {
        filtered = filter_min_length(filtered, config.min_chars);
        std::erase_if(annotations,
                      [&](const AnnotatedSample& s) { return s.char_length() <= config.min_chars; });
        write_jsonl(out_dir / "02_filter" / "corpus.jsonl", filtered.samples);
        write_jsonl(out_dir / "02_filter" / "annotations.jsonl", annotations);
    });

    AnnotationSets sets;
    AgreementReport agreement;
    stage("agreement", [&] {
        sets = group_by_annotator(annotations);
        agreement = pairwise_agreement(sets);
        write_text(out_dir / "03_agreement" / "agreement.json", agreement.to_json().dump(2) + "\n");
        write_text(out_dir / "03_agreement" / "matrix.csv", agreement.matrix_csv());
    });

    Corpus gold;
    stage("gold", [&] {
        gold = select_gold(sets, agreement, config.gold_threshold, config.seed);
        if (gold.empty()) throw EmptyAfterFiltering("no sample exceeds the agreement threshold");
        write_jsonl(out_dir / "04_gold" / "gold.jsonl", gold.samples);
    });

    std::vector<Split> splits;
    stage("split", [&] {
        for (const auto& name : config.splits) {
            auto split = make_split(gold, SplitSpec::parse(name, config.seed));
            write_split(split, out_dir / "05_splits" / split.spec.dir_name());
            splits.push_back(std::move(split));
        }
    });

    std::unique_ptr<ChatTransport> transport;
    std::string guidelines, definitions;
    stage("transport", [&] {
        transport = make_transport(config.llm, gold);
        guidelines = load_or(config.llm.guidelines_file, default_guidelines());
        definitions = load_or(config.llm.definitions_file, default_definitions());
    });

    auto batch_options = [&](AuditLog& audit) {
        BatchOptions o;
        o.model = config.llm.transport.model.empty() ? "mock" : config.llm.transport.model;
        o.retry = config.llm.transport.retry;
        o.parallelism = config.llm.parallelism;
        o.audit = &audit;
        o.sleep = options.sleep;
        return o;
    };

    stage("annotate", [&] {
        for (const auto& split : splits) {
            const auto dir = out_dir / "06_annotate" / split.spec.dir_name();
            fs::create_directories(dir);
            AuditLog audit(dir / "audit.jsonl", clock);
            auto annotated = annotate_batch(split, *transport, guidelines, batch_options(audit), config.llm.annotation);
            throw_if_all_transport_failed(annotated.failures, split.gold.size());
            result.annotation_failures += annotated.failures.size();
            write_jsonl(dir / "predictions.jsonl", annotated.predictions.samples);
            write_text(dir / "failures.json", failures_json(annotated.failures).dump(2) + "\n");
            auto report = evaluate_split(split.spec.name, split.gold, annotated.predictions);
            write_text(dir / "eval.json", report.to_json().dump(2) + "\n");
            result.evals.push_back(std::move(report));
        }
    });

    stage("generate", [&] {
        for (std::size_t i = 0; i < splits.size(); ++i) {
            const auto& split = splits[i];
            const auto dir = out_dir / "07_generate" / split.spec.dir_name();
            fs::create_directories(dir);
            const auto lists = sample_fallacy_lists(config.generation_batches, config.llm.seed + i);
            std::vector<GenerationRequest> requests;
            for (const auto& fallacies : lists)
                requests.push_back({split.fewshot, config.generation_samples, fallacies,
                                    "gen-" + split.spec.dir_name(), split.spec.name});
            AuditLog audit(dir / "audit.jsonl", clock);
            auto generated = generate_batch(requests, *transport, definitions, batch_options(audit), config.llm.generation);
            throw_if_all_transport_failed(generated.failures, requests.size());
            result.generation_failures += generated.failures.size();
            write_jsonl(dir / "synthetic.jsonl", generated.synthetic.samples);
            write_text(dir / "failures.json", failures_json(generated.failures).dump(2) + "\n");
            result.synthetic[split.spec.name] = std::move(generated.synthetic);
        }
    });

    Corpus all_synthetic;
    stage("stats", [&] {
        for (const auto& split : splits)
            for (const auto& s : result.synthetic[split.spec.name].samples) all_synthetic.samples.push_back(s);
        const TokenizerConfig tok;
        result.real_stats = compute_stats(filtered.empty() ? gold : filtered, tok, config.stats_top_k);
        result.synthetic_stats = compute_stats(all_synthetic, tok, config.stats_top_k);
        write_stats(result.real_stats, out_dir / "08_stats", "real");
        write_stats(result.synthetic_stats, out_dir / "08_stats", "synthetic");
    });

    std::optional<std::string> likert_csv;
    stage("review", [&] {
        if (!config.review_store) return;
        ReviewStore store(*config.review_store, config.likert_points);
        if (!config.reviewers.empty()) store.enqueue_tasks(all_synthetic, TaskKind::LikertReview, config.reviewers);
        likert_csv = store.likert_means_csv();
        write_text(out_dir / "likert_means.csv", *likert_csv);
    });

    stage("report", [&] {
        nlohmann::ordered_json r;
        r["counts"] = {{"corpus", filtered.size()},
                       {"annotations", annotations.size()},
                       {"annotators", agreement.annotators.size()},
                       {"gold", gold.size()},
                       {"synthetic", all_synthetic.size()},
                       {"annotation_failures", result.annotation_failures},
                       {"generation_failures", result.generation_failures}};
        auto evals = nlohmann::ordered_json::array();
        for (const auto& e : result.evals) evals.push_back(e.to_json());
        r["evaluation"] = std::move(evals);
        nlohmann::ordered_json gen;
        for (const auto& split : splits) {
            const auto& syn = result.synthetic[split.spec.name];
            const auto rate = compliance_rate(syn);
            gen[split.spec.name] = {{"samples", syn.size()},
                                    {"compliance", rate ? nlohmann::ordered_json(*rate) : nlohmann::ordered_json(nullptr)}};
        }
        r["generation"] = std::move(gen);
        r["stats"] = {{"real", result.real_stats.to_json()}, {"synthetic", result.synthetic_stats.to_json()}};
        if (config.review_store) {
            auto means = nlohmann::ordered_json::array();
            for (const auto& m : ReviewStore(*config.review_store, config.likert_points).likert_means())
                means.push_back({{"split", m.split}, {"criterion", m.criterion}, {"mean", m.mean}, {"count", m.count}});
            r["likert_means"] = std::move(means);
        }
        write_text(out_dir / "report.json", r.dump(2) + "\n");
        write_text(out_dir / "report.txt", format_report(r));
        write_text(out_dir / "f1_table.csv", f1_table_csv(result.evals));
        result.report = std::move(r);
    });

    manifest.outputs = {out_dir.string()};
    manifest.write(out_dir / "manifest.json");
    return result;
}

std::string format_report(const nlohmann::ordered_json& report) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    if (report.contains("counts")) {
        os << "Counts\n";
        for (const auto& [k, v] : report["counts"].items()) os << "  " << k << ": " << v.dump() << '\n';
    }
    if (report.contains("evaluation")) {
        os << "\nSpan F1 (strict / relaxed)\n";
        for (const auto& e : report["evaluation"])
            os << "  " << e.value("split", std::string("?")) << ": " << e["strict"]["f1"].get<double>() << " / "
               << e["relaxed"]["f1"].get<double>() << '\n';
    }
    if (report.contains("generation")) {
        os << "\nGeneration\n";
        for (const auto& [split, g] : report["generation"].items()) {
            os << "  " << split << ": " << g["samples"].dump() << " samples, compliance ";
            if (g["compliance"].is_null())
                os << "n/a\n";
            else
                os << g["compliance"].get<double>() << '\n';
        }
    }
    if (report.contains("stats")) {
        os << "\nCorpus statistics\n";
        for (const auto& [name, s] : report["stats"].items()) {
            os << "  " << name << ": tokens " << s["total_tokens"].dump() << ", diversity ";
            if (s["vocab_diversity"].is_null())
                os << "n/a";
            else
                os << s["vocab_diversity"].get<double>();
            os << ", hapax ";
            if (s["hapax"]["mean"].is_null())
                os << "n/a";
            else
                os << s["hapax"]["mean"].get<double>();
            os << '\n';
        }
    }
    if (report.contains("likert_means")) {
        os << "\nLikert means\n";
        for (const auto& m : report["likert_means"])
            os << "  " << m["split"].get<std::string>() << ' ' << m["criterion"].get<std::string>() << ": "
               << m["mean"].get<double>() << " (n=" << m["count"].dump() << ")\n";
    }
    return os.str();
}

}  // namespace slurg
