#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slurg/agreement.hpp"
#include "slurg/corpus_stats.hpp"
#include "slurg/dataset_ops.hpp"
#include "slurg/errors.hpp"
#include "slurg/hash.hpp"
#include "slurg/llm_gateway.hpp"
#include "slurg/pipeline.hpp"
#include "slurg/review_service.hpp"
#include "slurg/span_eval.hpp"

namespace fs = std::filesystem;
using namespace slurg;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string config;
    std::string out_dir;
    bool force = false;
};

Source parse_source_flag(const std::string& s) {
    auto src = source_from_string(s);
    if (!src) throw ConfigError("unknown source '" + s + "'");
    return *src;
}

// Where a command writes: a directory (--out-dir) or a single file (--out,
// --report) with side files and the manifest next to it.
struct Output {
    fs::path dir;
    std::optional<fs::path> file;

    fs::path main(const std::string& default_name) const { return file ? *file : dir / default_name; }
    fs::path side(const std::string& name) const {
        return file ? dir / (file->stem().string() + "." + name) : dir / name;
    }
    fs::path manifest() const { return side("manifest.json"); }
};

Output prepare_output(const Globals& g, const std::string& command, const std::string& file) {
    Output out;
    if (!file.empty()) {
        out.file = fs::path(file);
        out.dir = out.file->parent_path().empty() ? fs::path(".") : out.file->parent_path();
        if (fs::exists(*out.file) && !g.force)
            throw ConfigError("'" + file + "' already exists (use --force)");
        fs::create_directories(out.dir);
        return out;
    }
    if (g.out_dir.empty()) throw ConfigError(command + " needs --out-dir");
    prepare_out_dir(g.out_dir, g.force);
    out.dir = g.out_dir;
    return out;
}

RunManifest start_manifest(const Globals& g, const std::string& command, std::vector<std::string> inputs) {
    RunManifest m;
    m.command = command;
    if (!g.config.empty()) m.config_sha256 = sha256_hex(read_text(g.config));
    m.seeds = {{"seed", g.seed}};
    m.inputs = std::move(inputs);
    m.timestamp = AuditLog::utc_now();
    return m;
}

void finish_run(RunManifest& m, const Output& out, const std::vector<fs::path>& outputs) {
    for (const auto& o : outputs) m.outputs.push_back(o.string());
    m.write(out.manifest());
}

Corpus load_corpus(const std::string& path) {
    IngestOptions opts;
    opts.default_source = Source::Reddit;
    auto r = ingest(fs::path(path), opts);
    if (!r.rejects.empty())
        throw SchemaViolation(r.rejects.front().line, path + ": " + r.rejects.front().reason);
    return std::move(r.corpus);
}

std::vector<AnnotatedSample> load_annotations(const std::string& path) {
    IngestOptions opts;
    opts.default_source = Source::Reddit;
    opts.unique_ids = false;
    auto r = ingest(fs::path(path), opts);
    if (!r.rejects.empty())
        throw SchemaViolation(r.rejects.front().line, path + ": " + r.rejects.front().reason);
    return std::move(r.corpus.samples);
}

LlmConfig load_llm_config(const Globals& g) {
    if (g.config.empty()) throw ConfigError("an LLM config file is required (--config)");
    return LlmConfig::load(g.config);
}

BatchOptions batch_options(const LlmConfig& cfg, AuditLog& audit) {
    BatchOptions o;
    o.model = cfg.transport.model.empty() ? "mock" : cfg.transport.model;
    o.retry = cfg.transport.retry;
    o.parallelism = cfg.parallelism;
    o.audit = &audit;
    return o;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << v;
    return os.str();
}

ReviewServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slurg: fallacy-span annotation, evaluation and synthetic data toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--config", g.config, "Configuration file");
    app.add_option("--out-dir", g.out_dir, "Artifact directory");
    app.add_flag("--force", g.force, "Replace a non-empty output directory");
    app.set_version_flag("--version", kToolVersion);

    std::string out_file;
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_file, "Write the main output to this file instead of --out-dir");
    };

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate scraped JSONL into a corpus");
    std::string ingest_input, ingest_source;
    bool ingest_annotations = false;
    ingest_cmd->add_option("--input", ingest_input, "JSONL file")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--source", ingest_source, "reddit, fourchan or synthetic for records without one");
    ingest_cmd->add_flag("--annotations", ingest_annotations, "Allow repeated ids (one record per annotator)");
    add_out(ingest_cmd);
    ingest_cmd->callback([&] {
        IngestOptions opts;
        if (!ingest_source.empty()) opts.default_source = parse_source_flag(ingest_source);
        opts.unique_ids = !ingest_annotations;
        const auto out = prepare_output(g, "ingest", out_file);
        auto m = start_manifest(g, "ingest", {ingest_input});
        auto r = ingest(fs::path(ingest_input), opts);
        write_jsonl(out.main("corpus.jsonl"), r.corpus.samples);
        nlohmann::ordered_json rejects = nlohmann::ordered_json::array();
        for (const auto& rej : r.rejects) rejects.push_back({{"line", rej.line}, {"reason", rej.reason}, {"raw", rej.raw}});
        write_text(out.side("rejects.json"), rejects.dump(2) + "\n");
        finish_run(m, out, {out.main("corpus.jsonl"), out.side("rejects.json")});
        std::cout << "ingested " << r.corpus.size() << " samples, rejected " << r.rejects.size() << " lines\n";
    });

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "Drop samples at or below a length threshold");
    std::string filter_input;
    std::size_t min_chars = 32;
    filter_cmd->add_option("--input", filter_input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--min-chars", min_chars, "Keep texts longer than this")->capture_default_str();
    add_out(filter_cmd);
    filter_cmd->callback([&] {
        const auto corpus = load_corpus(filter_input);
        const auto out = prepare_output(g, "filter", out_file);
        auto m = start_manifest(g, "filter", {filter_input});
        const auto kept = filter_min_length(corpus, min_chars);
        write_jsonl(out.main("corpus.jsonl"), kept.samples);
        finish_run(m, out, {out.main("corpus.jsonl")});
        std::cout << "kept " << kept.size() << " of " << corpus.size() << " samples\n";
    });

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "Draw an annotation batch");
    std::string sample_input;
    std::size_t sample_n = 150;
    sample_cmd->add_option("--input", sample_input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("-n,--count", sample_n, "Batch size")->capture_default_str();
    add_out(sample_cmd);
    sample_cmd->callback([&] {
        const auto batch = sample_annotation_batch(load_corpus(sample_input), sample_n, g.seed);
        const auto out = prepare_output(g, "sample", out_file);
        auto m = start_manifest(g, "sample", {sample_input});
        write_jsonl(out.main("batch.jsonl"), batch.samples);
        finish_run(m, out, {out.main("batch.jsonl")});
        std::cout << "sampled " << batch.size() << " samples\n";
    });

    // agree
    auto* agree_cmd = app.add_subcommand("agree", "Pairwise Jaccard agreement between annotators");
    std::string agree_input;
    agree_cmd->add_option("--input", agree_input, "Annotation JSONL, one record per annotator and sample")
        ->required()
        ->check(CLI::ExistingFile);
    add_out(agree_cmd);
    agree_cmd->callback([&] {
        const auto report = pairwise_agreement(group_by_annotator(load_annotations(agree_input)));
        const auto out = prepare_output(g, "agree", out_file);
        auto m = start_manifest(g, "agree", {agree_input});
        write_text(out.main("agreement.json"), report.to_json().dump(2) + "\n");
        write_text(out.side("matrix.csv"), report.matrix_csv());
        finish_run(m, out, {out.main("agreement.json"), out.side("matrix.csv")});
        std::cout << report.matrix_csv();
    });

    // gold
    auto* gold_cmd = app.add_subcommand("gold", "Select gold labels by agreement threshold");
    std::string gold_input;
    double threshold = 0.8;
    gold_cmd->add_option("--input", gold_input, "Annotation JSONL")->required()->check(CLI::ExistingFile);
    gold_cmd->add_option("--threshold", threshold, "Keep samples with agreement above this")->capture_default_str();
    add_out(gold_cmd);
    gold_cmd->callback([&] {
        const auto gold = select_gold(group_by_annotator(load_annotations(gold_input)), threshold, g.seed);
        const auto out = prepare_output(g, "gold", out_file);
        auto m = start_manifest(g, "gold", {gold_input});
        write_jsonl(out.main("gold.jsonl"), gold.samples);
        finish_run(m, out, {out.main("gold.jsonl")});
        std::cout << "selected " << gold.size() << " gold samples\n";
    });

    // split
    auto* split_cmd = app.add_subcommand("split", "Make gold/few-shot splits");
    std::string split_input;
    std::vector<std::string> split_specs;
    split_cmd->add_option("--input", split_input, "Gold JSONL")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--spec", split_specs, "Split such as 80/20 (default: 100/0 90/10 80/20 70/30)");
    split_cmd->callback([&] {
        const auto gold = load_corpus(split_input);
        std::vector<SplitSpec> specs;
        if (split_specs.empty())
            specs = standard_splits(g.seed);
        else
            for (const auto& s : split_specs) specs.push_back(SplitSpec::parse(s, g.seed));
        const auto out = prepare_output(g, "split", "");
        auto m = start_manifest(g, "split", {split_input});
        std::vector<fs::path> outputs;
        for (const auto& spec : specs) {
            const auto split = make_split(gold, spec);
            write_split(split, out.dir / spec.dir_name());
            outputs.push_back(out.dir / spec.dir_name());
            std::cout << spec.name << ": gold " << split.gold.size() << ", few-shot " << split.fewshot.size() << '\n';
        }
        finish_run(m, out, outputs);
    });

    // annotate
    auto* annotate_cmd = app.add_subcommand("annotate", "Annotate a split with the LLM");
    std::string annotate_split;
    annotate_cmd->add_option("--split", annotate_split, "Split directory")->required()->check(CLI::ExistingDirectory);
    add_out(annotate_cmd);
    annotate_cmd->callback([&] {
        const auto cfg = load_llm_config(g);
        const auto split = read_split(annotate_split);
        auto transport = make_transport(cfg, split.gold);
        const auto guidelines = cfg.guidelines_file ? read_text(*cfg.guidelines_file) : default_guidelines();
        const auto out = prepare_output(g, "annotate", out_file);
        auto m = start_manifest(g, "annotate", {annotate_split});
        m.seeds["llm"] = cfg.seed;
        AuditLog audit(out.side("audit.jsonl"));
        const auto r = annotate_batch(split, *transport, guidelines, batch_options(cfg, audit), cfg.annotation);
        throw_if_all_transport_failed(r.failures, split.gold.size());
        write_jsonl(out.main("predictions.jsonl"), r.predictions.samples);
        finish_run(m, out, {out.main("predictions.jsonl"), out.side("audit.jsonl")});
        std::cout << "annotated " << r.predictions.size() << " samples, " << r.failures.size() << " failures\n";
        for (const auto& f : r.failures) std::cerr << "  " << f.id << ": " << f.reason << '\n';
    });

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "Generate synthetic samples from a split's few-shot set");
    std::string generate_split;
    std::size_t batches = 1, num_samples = 2;
    generate_cmd->add_option("--split", generate_split, "Split directory")->required()->check(CLI::ExistingDirectory);
    generate_cmd->add_option("--batches", batches, "Number of requests")->capture_default_str();
    generate_cmd->add_option("--num", num_samples, "Samples asked for per request")->capture_default_str();
    add_out(generate_cmd);
    generate_cmd->callback([&] {
        if (num_samples == 0) throw ConfigError("--num must be at least 1");
        const auto cfg = load_llm_config(g);
        const auto split = read_split(generate_split);
        auto transport = make_transport(cfg, split.gold);
        const auto defs = cfg.definitions_file ? read_text(*cfg.definitions_file) : default_definitions();
        const auto out = prepare_output(g, "generate", out_file);
        auto m = start_manifest(g, "generate", {generate_split});
        m.seeds["llm"] = cfg.seed;
        std::vector<GenerationRequest> requests;
        for (const auto& fallacies : sample_fallacy_lists(batches, g.seed))
            requests.push_back({split.fewshot, num_samples, fallacies, "gen-" + split.spec.dir_name(), split.spec.name});
        AuditLog audit(out.side("audit.jsonl"));
        const auto r = generate_batch(requests, *transport, defs, batch_options(cfg, audit), cfg.generation);
        throw_if_all_transport_failed(r.failures, requests.size());
        write_jsonl(out.main("synthetic.jsonl"), r.synthetic.samples);
        finish_run(m, out, {out.main("synthetic.jsonl"), out.side("audit.jsonl")});
        const auto rate = compliance_rate(r.synthetic);
        std::cout << "generated " << r.synthetic.size() << " samples, compliance "
                  << (rate ? fmt(*rate) : std::string("n/a")) << ", " << r.failures.size() << " failures\n";
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Strict and relaxed span F1");
    std::string eval_gold, eval_pred, eval_name = "eval";
    eval_cmd->add_option("--gold", eval_gold, "Gold JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--pred", eval_pred, "Prediction JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--name", eval_name, "Split name in the report")->capture_default_str();
    add_out(eval_cmd);
    eval_cmd->callback([&] {
        const auto report = evaluate_split(eval_name, load_corpus(eval_gold), load_corpus(eval_pred));
        const auto out = prepare_output(g, "eval", out_file);
        auto m = start_manifest(g, "eval", {eval_gold, eval_pred});
        write_text(out.main("eval.json"), report.to_json().dump(2) + "\n");
        write_text(out.side("f1_table.csv"), f1_table_csv({report}));
        finish_run(m, out, {out.main("eval.json"), out.side("f1_table.csv")});
        std::cout << eval_name << ": strict F1 " << fmt(report.strict.f1) << ", relaxed F1 " << fmt(report.relaxed.f1)
                  << '\n';
    });

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Token, hapax and phrase-type statistics");
    std::string stats_input, pos_file, stopwords = "english";
    std::size_t top_k = 20;
    bool no_tagger = false, keep_case = false;
    stats_cmd->add_option("--input", stats_input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("-k,--top-k", top_k, "Most frequent tokens to report")->capture_default_str();
    stats_cmd->add_option("--pos", pos_file, "POS sidecar file")->check(CLI::ExistingFile);
    stats_cmd->add_flag("--no-tagger", no_tagger, "Require POS from the sidecar");
    stats_cmd->add_option("--stopwords", stopwords, "english, none or a word-list file")->capture_default_str();
    stats_cmd->add_flag("--keep-case", keep_case, "Do not lowercase tokens");
    stats_cmd->add_option("--report", out_file, "Write the JSON report to this file instead of --out-dir");
    stats_cmd->callback([&] {
        TokenizerConfig tok;
        tok.lowercase = !keep_case;
        if (stopwords == "none")
            tok.stopwords = StopwordList::none();
        else if (stopwords != "english")
            tok.stopwords = StopwordList::from_file(stopwords);
        std::optional<PosSidecar> sidecar;
        if (!pos_file.empty()) sidecar = read_pos_sidecar(fs::path(pos_file));
        const auto report =
            compute_stats(load_corpus(stats_input), tok, top_k, sidecar ? &*sidecar : nullptr, !no_tagger);
        const auto out = prepare_output(g, "stats", out_file);
        auto m = start_manifest(g, "stats", {stats_input});
        if (!pos_file.empty()) m.inputs.push_back(pos_file);
        write_text(out.main("stats.json"), report.to_json().dump(2) + "\n");
        write_text(out.side("hapax.csv"), report.hapax_csv());
        write_text(out.side("phrases.csv"), report.phrase_csv());
        finish_run(m, out, {out.main("stats.json"), out.side("hapax.csv"), out.side("phrases.csv")});
        std::cout << "tokens " << report.total_tokens << ", vocab diversity "
                  << (report.vocab_diversity ? fmt(*report.vocab_diversity) : std::string("n/a")) << ", hapax mean "
                  << (report.hapax.mean ? fmt(*report.hapax.mean) : std::string("n/a")) << '\n';
        for (const auto& [t, n] : report.top_k) std::cout << "  " << t << '\t' << n << '\n';
    });

    // review
    auto* review_cmd = app.add_subcommand("review", "Human review store and server");
    review_cmd->require_subcommand(1);
    std::string store_dir;
    int likert_points = 4;
    review_cmd->add_option("--store", store_dir, "Store directory")->required();
    review_cmd->add_option("--likert-points", likert_points, "Likert scale size")->capture_default_str();

    auto* serve_cmd = review_cmd->add_subcommand("serve", "Serve the review API");
    std::string host = "127.0.0.1", static_dir;
    int port = 8642;
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--static", static_dir, "Directory with the built UI")->check(CLI::ExistingDirectory);
    serve_cmd->callback([&] {
        ReviewStore store(store_dir, likert_points);
        ReviewServer server(store, static_dir.empty() ? std::nullopt : std::optional<fs::path>(static_dir));
        g_server = &server;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        std::cout << "serving review API on http://" << host << ':' << port << std::endl;
        if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
        g_server = nullptr;
    });

    auto* enqueue_cmd = review_cmd->add_subcommand("enqueue", "Create review tasks");
    std::string enqueue_input, enqueue_kind = "span_annotation";
    std::vector<std::string> reviewers;
    enqueue_cmd->add_option("--input", enqueue_input, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    enqueue_cmd->add_option("--kind", enqueue_kind, "span_annotation or likert_review")->capture_default_str();
    enqueue_cmd->add_option("--reviewers", reviewers, "Reviewer ids")->required()->delimiter(',');
    enqueue_cmd->callback([&] {
        const auto kind = task_kind_from_string(enqueue_kind);
        if (!kind) throw ConfigError("unknown task kind '" + enqueue_kind + "'");
        ReviewStore store(store_dir, likert_points);
        const auto n = store.enqueue_tasks(load_corpus(enqueue_input), *kind, reviewers);
        std::cout << n << " tasks\n";
    });

    auto* export_cmd = review_cmd->add_subcommand("export", "Export review results");
    std::string export_kind = "span_annotation";
    export_cmd->add_option("--kind", export_kind, "span_annotation, likert_review or likert_means")->capture_default_str();
    export_cmd->add_option("--out", out_file, "Output file (default: stdout, or --out-dir)");
    export_cmd->callback([&] {
        ReviewStore store(store_dir, likert_points);
        std::string content, name;
        if (export_kind == "span_annotation") {
            content = to_jsonl(store.export_annotations());
            name = "annotations.jsonl";
        } else if (export_kind == "likert_review") {
            content = store.export_likert_csv();
            name = "likert.csv";
        } else if (export_kind == "likert_means") {
            content = store.likert_means_csv();
            name = "likert_means.csv";
        } else {
            throw ConfigError("unknown export kind '" + export_kind + "'");
        }
        if (g.out_dir.empty() && out_file.empty()) {
            std::cout << content;
            return;
        }
        const auto out = prepare_output(g, "review export", out_file);
        auto m = start_manifest(g, "review export", {store_dir});
        write_text(out.main(name), content);
        finish_run(m, out, {out.main(name)});
    });

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage from a pipeline config");
    pipeline_cmd->callback([&] {
        if (g.config.empty()) throw ConfigError("pipeline needs --config");
        if (g.out_dir.empty()) throw ConfigError("pipeline needs --out-dir");
        auto cfg = PipelineConfig::load(g.config);
        if (app.get_option("--seed")->count() > 0) cfg.seed = g.seed;
        PipelineOptions opts;
        opts.force = g.force;
        opts.on_stage = [](const std::string& s) { std::cerr << "[slurg] " << s << std::endl; };
        const auto r = pipeline_run(cfg, g.out_dir, opts);
        std::cout << format_report(r.report);
    });

    // report
    auto* report_cmd = app.add_subcommand("report", "Print a pipeline run's report");
    std::string run_dir;
    bool as_json = false;
    report_cmd->add_option("--run", run_dir, "Pipeline output directory")->required()->check(CLI::ExistingDirectory);
    report_cmd->add_flag("--json", as_json, "Print report.json");
    report_cmd->callback([&] {
        const auto text = read_text(fs::path(run_dir) / "report.json");
        if (as_json) {
            std::cout << text;
            return;
        }
        try {
            std::cout << format_report(nlohmann::ordered_json::parse(text));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("report.json is not valid JSON: " + std::string(e.what()));
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const slurg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
