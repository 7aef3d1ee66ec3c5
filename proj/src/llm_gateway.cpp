#include "slurg/llm_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "slurg/errors.hpp"
#include "slurg/hash.hpp"
#include "slurg/prompt_templates.hpp"
#include "slurg/rng.hpp"
#include "slurg/tag_codec.hpp"

namespace slurg {

// ------------------------------------------------------------------ prompts

void SamplingParams::check() const {
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (max_tokens == 0) throw ConfigError("max_tokens must be >= 1");
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        const std::string key(tmpl.substr(open + 2, close - open - 2));
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("no value for template slot {{" + key + "}}");
        out.append(tmpl.substr(pos, open - pos));
        out += it->second;
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

namespace {

std::string taxonomy_outline() {
    std::string out;
    for (Tier1 group : kTier1Labels) {
        out += "- ";
        out += tag_name(group);
        out += ':';
        bool first = true;
        for (Tier2 t : tier2_members(group)) {
            std::string name(tier2_name(t));
            std::replace(name.begin(), name.end(), '_', ' ');
            out += first ? " " : ", ";
            out += name;
            first = false;
        }
        out += '\n';
    }
    return out;
}

}  // namespace

std::string default_guidelines() {
    return "Annotate the smallest meaningful span that carries a fallacy. Each top-level tag "
           "covers the fine-grained fallacies listed after it:\n" +
           taxonomy_outline();
}

std::string default_definitions() {
    return "Fallacy types by tag, with the fine-grained fallacies each one covers:\n" + taxonomy_outline();
}

std::string format_fallacy_list(const std::vector<Tier1>& fallacies) {
    std::string out = "[";
    for (std::size_t i = 0; i < fallacies.size(); ++i) {
        if (i) out += ", ";
        out += tag_name(fallacies[i]);
    }
    return out + "]";
}

PromptBundle build_annotation_prompt(const AnnotatedSample& sample, const std::string& guidelines,
                                     const Corpus& fewshot, SamplingParams params) {
    if (sample.text.empty()) throw DataError("sample '" + sample.sample_id + "' has empty text");
    params.check();

    std::string examples;
    for (const auto& ex : fewshot.samples) {
        if (!examples.empty()) examples += '\n';
        examples += "<example>\n<text>\n" + ex.text + "\n</text>\n<labeled_text>\n" +
                    render_tagged(ex).value + "\n</labeled_text>\n</example>";
    }
    PromptBundle bundle;
    bundle.system = std::string(templates::kAnnotationSystemPrompt);
    bundle.user = fill_template(templates::kAnnotationPromptTemplate,
                                {{"GUIDELINES", guidelines},
                                 {"FEW_SHOT_EXAMPLES", examples},
                                 {"TEXT", sample.text}});
    bundle.params = params;
    return bundle;
}

PromptBundle build_generation_prompt(const GenerationRequest& request, const std::string& definitions,
                                     SamplingParams params) {
    if (request.num_samples == 0) throw ConfigError("num_samples must be >= 1");
    params.check();

    std::string samples;
    for (const auto& ex : request.fewshot.samples) {
        if (!samples.empty()) samples += '\n';
        samples += "<labeled_text>\n" + render_tagged(ex).value + "\n</labeled_text>";
    }
    PromptBundle bundle;
    bundle.system = std::string(templates::kGenerationSystemPrompt);
    bundle.user = fill_template(templates::kGenerationPromptTemplate,
                                {{"FALLACY_DEFINITIONS", definitions},
                                 {"FEW_SHOT_SAMPLES", samples},
                                 {"NUM_SAMPLES", std::to_string(request.num_samples)},
                                 {"FALLACIES", format_fallacy_list(request.fallacies)}});
    bundle.params = params;
    return bundle;
}

std::vector<std::vector<Tier1>> sample_fallacy_lists(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<Tier1>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto subset = rng.uniform_index(8);
        std::vector<Tier1> labels;
        for (std::size_t bit = 0; bit < 3; ++bit)
            if (subset & (std::size_t{1} << bit)) labels.push_back(kTier1Labels[bit]);
        out.push_back(std::move(labels));
    }
    return out;
}

// ---------------------------------------------------------------- transport

void TransportConfig::check() const {
    if (retry.max_attempts == 0) throw ConfigError("retry.max_attempts must be >= 1");
    if (kind == "mock") return;
    if (kind != "http") throw ConfigError("unknown transport kind '" + kind + "'");
    if (endpoint.empty()) throw ConfigError("transport.endpoint is required for the http transport");
    if (model.empty()) throw ConfigError("transport.model is required for the http transport");
}

nlohmann::ordered_json build_request_body(const PromptBundle& prompt, const std::string& model) {
    nlohmann::ordered_json body;
    body["model"] = model;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "system"}, {"content", prompt.system}}, {{"role", "user"}, {"content", prompt.user}}});
    body["temperature"] = prompt.params.temperature;
    body["top_p"] = prompt.params.top_p;
    body["max_tokens"] = prompt.params.max_tokens;
    return body;
}

HttpTransport::HttpTransport(TransportConfig config) : config_(std::move(config)) {
    config_.check();
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url))
        throw ConfigError("transport.endpoint '" + config_.endpoint + "' is not an http(s) URL");
    scheme_host_port_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "";
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    if (!path_.ends_with("/chat/completions")) path_ += "/chat/completions";

    if (!config_.auth_env.empty()) {
        const char* token = std::getenv(config_.auth_env.c_str());
        if (!token) throw ConfigError("environment variable '" + config_.auth_env + "' is not set");
        token_ = token;
    }
}

std::string HttpTransport::complete(const nlohmann::ordered_json& body) {
    httplib::Client client(scheme_host_port_);
    const auto secs = static_cast<time_t>(config_.timeout.count());
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("server returned HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw TransportError("server returned HTTP " + std::to_string(res->status) + ": " + res->body,
                             false);
    try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("unexpected response shape: ") + e.what(), false);
    }
}

std::string MockTransport::complete(const nlohmann::ordered_json& body) {
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(body);
    }
    return handler_(body);
}

std::vector<nlohmann::ordered_json> MockTransport::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

MockTransport::Handler echo_gold_handler(const Corpus& gold) {
    auto by_text = std::make_shared<std::map<std::string, std::string>>();
    for (const auto& s : gold.samples) by_text->emplace(s.text, render_tagged(s).value);
    return [by_text](const nlohmann::ordered_json& body) -> std::string {
        const auto user = body.at("messages").at(1).at("content").get<std::string>();
        const auto open = user.rfind("<text>\n");
        if (open == std::string::npos) return "no text block in prompt";
        const auto begin = open + 7;
        const auto end = user.find("\n</text>", begin);
        if (end == std::string::npos) return "no text block in prompt";
        auto it = by_text->find(user.substr(begin, end - begin));
        if (it == by_text->end()) return "unknown sample";
        return "<fallacy_analysis>\necho\n</fallacy_analysis>\n<labeled_text>\n" + it->second +
               "\n</labeled_text>";
    };
}

std::string complete_with_retry(ChatTransport& transport, const nlohmann::ordered_json& body,
                                const RetryPolicy& policy, const Sleeper& sleep) {
    auto backoff = policy.initial_backoff;
    const std::size_t attempts = std::max<std::size_t>(1, policy.max_attempts);
    for (std::size_t attempt = 1;; ++attempt) {
        try {
            return transport.complete(body);
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= attempts) throw;
        }
        if (sleep)
            sleep(backoff);
        else
            std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
    }
}

// ---------------------------------------------------------------- audit log

AuditLog::AuditLog(std::filesystem::path path, Clock clock)
    : path_(std::move(path)), clock_(std::move(clock)) {
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
}

std::string AuditLog::utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void AuditLog::append(AuditEntry entry) {
    std::lock_guard lock(mutex_);
    if (entry.timestamp.empty()) entry.timestamp = clock_ ? clock_() : utc_now();
    if (path_) {
        nlohmann::ordered_json j;
        j["request_id"] = entry.request_id;
        j["prompt_sha256"] = entry.prompt_sha256;
        j["raw_response"] = entry.raw_response;
        if (!entry.error.empty()) j["error"] = entry.error;
        j["timestamp"] = entry.timestamp;
        std::ofstream out(*path_, std::ios::app | std::ios::binary);
        if (!out) throw IoFailure("cannot append to audit log '" + path_->string() + "'");
        out << j.dump() << '\n';
    }
    entries_.push_back(std::move(entry));
}

std::vector<AuditEntry> AuditLog::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

// ---------------------------------------------------------------- pipelines

namespace {

// Runs fn(0..n-1) on up to `parallelism` threads.
template <typename Fn>
void run_bounded(std::size_t n, std::size_t parallelism, Fn&& fn) {
    const std::size_t workers = std::min(n, std::max<std::size_t>(1, parallelism));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

struct Exchange {
    std::string request_id;
    std::string body_sha256;
    std::string raw;
    std::string error;
};

Exchange exchange(ChatTransport& transport, const nlohmann::ordered_json& body, std::string request_id,
                  const BatchOptions& options) {
    Exchange ex;
    ex.request_id = std::move(request_id);
    ex.body_sha256 = sha256_hex(body.dump());
    try {
        ex.raw = complete_with_retry(transport, body, options.retry, options.sleep);
    } catch (const TransportError& e) {
        ex.error = e.what();
    }
    return ex;
}

void log_exchanges(const std::vector<Exchange>& exchanges, AuditLog* audit) {
    if (!audit) return;
    for (const auto& ex : exchanges)
        audit->append({ex.request_id, ex.body_sha256, ex.raw, ex.error, {}});
}

std::string describe_repairs(const std::vector<Repair>& repairs) {
    std::string out;
    for (const auto& r : repairs) {
        if (!out.empty()) out += ';';
        out += std::string(to_string(r.kind)) + ":" + r.tag + "@" + std::to_string(r.position);
    }
    return out;
}

std::string trim_copy(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, s.find_last_not_of(ws) - b + 1));
}

// `Labeled Text: ...` lines, the plain answer format some models fall back to.
std::optional<std::string> labeled_text_line(const std::string& raw) {
    static constexpr std::string_view marker = "Labeled Text:";
    const auto at = raw.find(marker);
    if (at == std::string::npos) return std::nullopt;
    const auto begin = at + marker.size();
    const auto end = raw.find('\n', begin);
    auto line = trim_copy(std::string_view(raw).substr(begin, end == std::string::npos ? end : end - begin));
    if (line.empty()) return std::nullopt;
    return line;
}

}  // namespace

AnnotateResult annotate_batch(const Split& split, ChatTransport& transport, const std::string& guidelines,
                              const BatchOptions& options, SamplingParams params) {
    if (split.gold.empty()) throw DataError("split '" + split.spec.name + "' has no gold samples");

    const std::size_t n = split.gold.size();
    std::vector<Exchange> exchanges(n);
    std::vector<nlohmann::ordered_json> bodies(n);
    for (std::size_t i = 0; i < n; ++i)
        bodies[i] = build_request_body(
            build_annotation_prompt(split.gold.samples[i], guidelines, split.fewshot, params), options.model);

    run_bounded(n, options.parallelism, [&](std::size_t i) {
        exchanges[i] = exchange(transport, bodies[i],
                                "annotate/" + split.spec.dir_name() + "/" + split.gold.samples[i].sample_id, options);
    });
    log_exchanges(exchanges, options.audit);

    AnnotateResult result;
    result.predictions.provenance = "annotate(" + split.spec.name + ", model=" + options.model + ")";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& gold = split.gold.samples[i];
        AnnotatedSample pred;
        pred.sample_id = gold.sample_id;
        pred.annotator_id = "model:" + options.model;
        pred.source = gold.source;
        pred.meta["split"] = split.spec.name;

        auto fail = [&](std::string reason, bool transport = false) {
            pred.text = gold.text;
            pred.meta["failure"] = reason;
            result.failures.push_back({gold.sample_id, std::move(reason), transport});
        };

        if (!exchanges[i].error.empty()) {
            fail("transport: " + exchanges[i].error, true);
        } else {
            auto blocks = extract_labeled_blocks(exchanges[i].raw);
            if (blocks.empty())
                if (auto line = labeled_text_line(exchanges[i].raw)) blocks.push_back(TaggedText{*line});
            if (blocks.empty()) {
                fail("no labeled_text block in response");
            } else {
                auto parsed = parse_tagged(blocks.front().value, Strictness::Lenient);
                pred.text = std::move(parsed.sample.text);
                pred.spans = std::move(parsed.sample.spans);
                if (!parsed.repairs.empty()) pred.meta["repairs"] = describe_repairs(parsed.repairs);
                if (blocks.size() > 1) pred.meta["extra_blocks"] = std::to_string(blocks.size() - 1);
                pred.meta["drift"] = pred.text == gold.text ? "false" : "true";
            }
        }
        result.predictions.samples.push_back(std::move(pred));
    }
    return result;
}

GenerateResult generate_batch(const std::vector<GenerationRequest>& requests, ChatTransport& transport,
                              const std::string& definitions, const BatchOptions& options,
                              SamplingParams params) {
    const std::size_t n = requests.size();
    std::vector<Exchange> exchanges(n);
    std::vector<nlohmann::ordered_json> bodies(n);
    std::vector<std::string> request_ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        bodies[i] = build_request_body(build_generation_prompt(requests[i], definitions, params), options.model);
        std::ostringstream id;
        id << requests[i].seed_tag << '-' << std::setw(4) << std::setfill('0') << i;
        request_ids[i] = id.str();
    }

    run_bounded(n, options.parallelism, [&](std::size_t i) {
        exchanges[i] = exchange(transport, bodies[i], "generate/" + request_ids[i], options);
    });
    log_exchanges(exchanges, options.audit);

    GenerateResult result;
    result.synthetic.provenance = "generate(model=" + options.model + ")";
    std::set<std::string> used_ids;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& req = requests[i];
        if (!exchanges[i].error.empty()) {
            result.failures.push_back({request_ids[i], "transport: " + exchanges[i].error, true});
            continue;
        }
        const auto blocks = extract_labeled_blocks(exchanges[i].raw);
        std::vector<AnnotatedSample> produced;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            auto parsed = parse_tagged(trim_copy(blocks[b].value), Strictness::Lenient);
            if (parsed.sample.text.empty()) continue;

            AnnotatedSample s;
            std::ostringstream id;
            id << request_ids[i] << '-' << std::setw(2) << std::setfill('0') << b;
            s.sample_id = id.str();
            s.annotator_id = "model:" + options.model;
            s.source = Source::Synthetic;
            s.text = std::move(parsed.sample.text);
            s.spans = std::move(parsed.sample.spans);
            s.meta["requested_fallacies"] = format_fallacy_list(req.fallacies);
            s.meta["split_name"] = req.split_name;
            s.meta["request_id"] = request_ids[i];
            if (!parsed.repairs.empty()) s.meta["repairs"] = describe_repairs(parsed.repairs);

            bool compliant = true;
            for (Tier1 want : req.fallacies)
                compliant = compliant && std::any_of(s.spans.begin(), s.spans.end(),
                                                     [&](const Span& sp) { return sp.label.tier1 == want; });
            s.meta["compliant"] = compliant ? "true" : "false";
            for (const auto& ex : req.fewshot.samples)
                if (ex.text == s.text) {
                    s.meta["duplicate_of_fewshot"] = ex.sample_id;
                    break;
                }
            produced.push_back(std::move(s));
        }
        if (produced.empty()) {
            result.failures.push_back({request_ids[i], "no labeled_text block in response"});
            continue;
        }
        if (produced.size() < req.num_samples)
            for (auto& s : produced)
                s.meta["shortfall"] = std::to_string(req.num_samples - produced.size());
        for (auto& s : produced) {
            if (!used_ids.insert(s.sample_id).second)
                throw DataError("generated sample id collision '" + s.sample_id + "'; use distinct seed tags");
            result.synthetic.samples.push_back(std::move(s));
        }
    }
    return result;
}

void throw_if_all_transport_failed(const std::vector<BatchFailure>& failures, std::size_t total) {
    if (total == 0 || failures.size() < total) return;
    for (const auto& f : failures)
        if (!f.transport) return;
    throw TransportError("all " + std::to_string(total) + " requests failed; first: " + failures.front().reason, false);
}

std::optional<double> compliance_rate(const Corpus& synthetic) {
    std::size_t total = 0, ok = 0;
    for (const auto& s : synthetic.samples) {
        auto it = s.meta.find("compliant");
        if (it == s.meta.end()) continue;
        ++total;
        if (it->second == "true") ++ok;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(ok) / static_cast<double>(total);
}

// ------------------------------------------------------------------- config

namespace {

SamplingParams params_from_json(const nlohmann::json& j, SamplingParams params) {
    if (j.contains("temperature")) params.temperature = j["temperature"].get<double>();
    if (j.contains("top_p")) params.top_p = j["top_p"].get<double>();
    if (j.contains("max_tokens")) params.max_tokens = j["max_tokens"].get<std::size_t>();
    params.check();
    return params;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

}  // namespace

LlmConfig LlmConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    LlmConfig cfg;
    try {
        if (j.contains("transport")) {
            const auto& t = j["transport"];
            cfg.transport.kind = t.value("kind", cfg.transport.kind);
            cfg.transport.endpoint = t.value("endpoint", std::string{});
            cfg.transport.model = t.value("model", std::string{});
            cfg.transport.auth_env = t.value("auth_env", std::string{});
            cfg.transport.timeout = std::chrono::seconds(t.value("timeout_s", 120));
            cfg.transport.retry.max_attempts = t.value("max_attempts", std::size_t{3});
            cfg.transport.retry.initial_backoff = std::chrono::milliseconds(t.value("backoff_ms", 500));
            cfg.transport.retry.multiplier = t.value("backoff_multiplier", 2.0);
            if (t.contains("mock_generation_response"))
                cfg.mock_generation_response =
                    resolve(base_dir, t["mock_generation_response"].get<std::string>());
        }
        if (j.contains("annotation")) cfg.annotation = params_from_json(j["annotation"], cfg.annotation);
        if (j.contains("generation")) cfg.generation = params_from_json(j["generation"], cfg.generation);
        cfg.parallelism = j.value("parallelism", std::size_t{4});
        cfg.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("guidelines_file"))
            cfg.guidelines_file = resolve(base_dir, j["guidelines_file"].get<std::string>());
        if (j.contains("definitions_file"))
            cfg.definitions_file = resolve(base_dir, j["definitions_file"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    if (cfg.parallelism == 0) throw ConfigError("parallelism must be >= 1");
    cfg.transport.check();
    return cfg;
}

LlmConfig LlmConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path());
}

}  // namespace slurg
