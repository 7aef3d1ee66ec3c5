#include "slurg/review_service.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>

#include "slurg/errors.hpp"

namespace slurg {

std::string_view to_string(TaskKind kind) noexcept {
    return kind == TaskKind::SpanAnnotation ? "span_annotation" : "likert_review";
}

std::optional<TaskKind> task_kind_from_string(std::string_view s) noexcept {
    if (s == "span_annotation") return TaskKind::SpanAnnotation;
    if (s == "likert_review") return TaskKind::LikertReview;
    return std::nullopt;
}

std::string_view to_string(TaskStatus status) noexcept {
    return status == TaskStatus::Pending ? "pending" : "done";
}

std::string make_task_id(TaskKind kind, const std::string& reviewer, const std::string& sample_id) {
    return std::string(kind == TaskKind::SpanAnnotation ? "span" : "likert") + ":" + reviewer + ":" +
           sample_id;
}

namespace {

constexpr std::array<const char*, 3> kCriteria{"realism", "fallacy_accuracy", "span_accuracy"};

int criterion_value(const LikertScore& s, std::size_t i) {
    return i == 0 ? s.realism : i == 1 ? s.fallacy_accuracy : s.span_accuracy;
}

}  // namespace

ReviewStore::ReviewStore(std::filesystem::path dir, int likert_points)
    : log_path_(dir / "events.jsonl"), likert_points_(likert_points) {
    if (likert_points_ < 2) throw ConfigError("likert scale needs at least 2 points");
    std::filesystem::create_directories(dir);
    std::ifstream in(log_path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            apply(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaViolation(line_no, log_path_.string() + ": " + e.what());
        }
    }
}

void ReviewStore::apply(const nlohmann::json& event) {
    const auto type = event.at("event").get<std::string>();
    if (type == "sample") {
        auto s = sample_from_json(event.at("sample"));
        samples_[s.sample_id] = std::move(s);
    } else if (type == "task") {
        ReviewTask t;
        t.task_id = event.at("task_id").get<std::string>();
        t.sample_id = event.at("sample_id").get<std::string>();
        t.reviewer = event.at("reviewer").get<std::string>();
        t.kind = task_kind_from_string(event.at("kind").get<std::string>()).value();
        tasks_.emplace(t.task_id, std::move(t));
    } else if (type == "annotation") {
        const auto id = event.at("task_id").get<std::string>();
        annotations_[id] = sample_from_json(event.at("sample"));
        tasks_.at(id).status = TaskStatus::Done;
    } else if (type == "likert") {
        const auto id = event.at("task_id").get<std::string>();
        const auto& task = tasks_.at(id);
        LikertScore s;
        s.realism = event.at("realism").get<int>();
        s.fallacy_accuracy = event.at("fallacy_accuracy").get<int>();
        s.span_accuracy = event.at("span_accuracy").get<int>();
        s.reviewer_id = task.reviewer;
        s.sample_id = task.sample_id;
        likert_[id] = s;
        tasks_.at(id).status = TaskStatus::Done;
    }
}

void ReviewStore::append_event(const nlohmann::ordered_json& event) {
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    if (!out) throw IoFailure("cannot append to '" + log_path_.string() + "'");
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw IoFailure("write failed for '" + log_path_.string() + "'");
}

std::size_t ReviewStore::enqueue_tasks(const Corpus& corpus, TaskKind kind,
                                       const std::vector<std::string>& reviewers) {
    std::unique_lock lock(mutex_);
    std::size_t count = 0;
    for (const auto& s : corpus.samples) {
        if (auto it = samples_.find(s.sample_id); it == samples_.end()) {
            nlohmann::ordered_json ev;
            ev["event"] = "sample";
            ev["sample"] = to_json(s);
            append_event(ev);
            samples_[s.sample_id] = s;
        } else if (it->second.text != s.text) {
            throw DataError("sample '" + s.sample_id + "' is already stored with a different text");
        }
        for (const auto& reviewer : reviewers) {
            const auto id = make_task_id(kind, reviewer, s.sample_id);
            ++count;
            if (tasks_.count(id)) continue;
            nlohmann::ordered_json ev;
            ev["event"] = "task";
            ev["task_id"] = id;
            ev["sample_id"] = s.sample_id;
            ev["reviewer"] = reviewer;
            ev["kind"] = to_string(kind);
            append_event(ev);
            tasks_[id] = ReviewTask{id, s.sample_id, reviewer, kind, TaskStatus::Pending};
        }
    }
    return count;
}

std::vector<ReviewTask> ReviewStore::tasks(const std::optional<std::string>& reviewer,
                                           const std::optional<TaskKind>& kind) const {
    std::shared_lock lock(mutex_);
    std::vector<ReviewTask> out;
    for (const auto& [id, t] : tasks_) {
        if (reviewer && t.reviewer != *reviewer) continue;
        if (kind && t.kind != *kind) continue;
        out.push_back(t);
    }
    return out;
}

std::optional<ReviewTask> ReviewStore::task(const std::string& task_id) const {
    std::shared_lock lock(mutex_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) return std::nullopt;
    return it->second;
}

std::optional<AnnotatedSample> ReviewStore::sample(const std::string& sample_id) const {
    std::shared_lock lock(mutex_);
    auto it = samples_.find(sample_id);
    if (it == samples_.end()) return std::nullopt;
    return it->second;
}

AnnotatedSample ReviewStore::submit_annotation(const std::string& task_id, const TaggedText& tagged) {
    std::unique_lock lock(mutex_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw UnknownTask("no task '" + task_id + "'");
    if (it->second.kind != TaskKind::SpanAnnotation)
        throw UnknownTask("task '" + task_id + "' is not a span_annotation task");
    const auto& original = samples_.at(it->second.sample_id);

    auto parsed = parse_tagged(tagged.value, Strictness::Strict);
    if (parsed.sample.text != original.text)
        throw TextDrift("submitted text differs from sample '" + original.sample_id + "'");

    AnnotatedSample stored = original;
    stored.spans = std::move(parsed.sample.spans);
    stored.annotator_id = it->second.reviewer;
    stored.normalize();

    nlohmann::ordered_json ev;
    ev["event"] = "annotation";
    ev["task_id"] = task_id;
    ev["sample"] = to_json(stored);
    append_event(ev);
    annotations_[task_id] = stored;
    it->second.status = TaskStatus::Done;
    return stored;
}

LikertScore ReviewStore::submit_likert(const std::string& task_id, int realism, int fallacy_accuracy,
                                       int span_accuracy) {
    std::unique_lock lock(mutex_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw UnknownTask("no task '" + task_id + "'");
    if (it->second.kind != TaskKind::LikertReview)
        throw UnknownTask("task '" + task_id + "' is not a likert_review task");
    for (int v : {realism, fallacy_accuracy, span_accuracy})
        if (v < 1 || v > likert_points_)
            throw OutOfScale("score " + std::to_string(v) + " outside 1.." + std::to_string(likert_points_));

    nlohmann::ordered_json ev;
    ev["event"] = "likert";
    ev["task_id"] = task_id;
    ev["realism"] = realism;
    ev["fallacy_accuracy"] = fallacy_accuracy;
    ev["span_accuracy"] = span_accuracy;
    append_event(ev);

    LikertScore s{realism, fallacy_accuracy, span_accuracy, it->second.reviewer, it->second.sample_id};
    likert_[task_id] = s;
    it->second.status = TaskStatus::Done;
    return s;
}

std::vector<AnnotatedSample> ReviewStore::export_annotations() const {
    std::shared_lock lock(mutex_);
    std::vector<AnnotatedSample> out;
    for (const auto& [id, s] : annotations_) out.push_back(s);
    return out;
}

std::vector<LikertScore> ReviewStore::likert_scores() const {
    std::shared_lock lock(mutex_);
    std::vector<LikertScore> out;
    for (const auto& [id, s] : likert_) out.push_back(s);
    return out;
}

std::string ReviewStore::split_of(const std::string& sample_id) const {
    auto it = samples_.find(sample_id);
    if (it == samples_.end()) return "unknown";
    for (const char* key : {"split_name", "split"})
        if (auto m = it->second.meta.find(key); m != it->second.meta.end() && !m->second.empty())
            return m->second;
    return "unknown";
}

std::string ReviewStore::export_likert_csv() const {
    std::shared_lock lock(mutex_);
    std::ostringstream os;
    os << "split,reviewer,sample_id,criterion,value\n";
    for (const auto& [id, s] : likert_)
        for (std::size_t c = 0; c < kCriteria.size(); ++c)
            os << split_of(s.sample_id) << ',' << s.reviewer_id << ',' << s.sample_id << ',' << kCriteria[c]
               << ',' << criterion_value(s, c) << '\n';
    return os.str();
}

std::vector<LikertMean> ReviewStore::likert_means() const {
    std::shared_lock lock(mutex_);
    std::map<std::string, std::array<std::pair<long long, std::size_t>, 3>> sums;
    for (const auto& [id, s] : likert_) {
        auto& row = sums[split_of(s.sample_id)];
        for (std::size_t c = 0; c < 3; ++c) {
            row[c].first += criterion_value(s, c);
            ++row[c].second;
        }
    }
    std::vector<LikertMean> out;
    for (const auto& [split, row] : sums) {
        double overall = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double mean = static_cast<double>(row[c].first) / static_cast<double>(row[c].second);
            overall += mean;
            out.push_back({split, kCriteria[c], mean, row[c].second});
        }
        out.push_back({split, "overall", overall / 3.0, row[0].second});
    }
    return out;
}

std::string ReviewStore::likert_means_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "split,criterion,mean,count\n";
    for (const auto& m : likert_means()) os << m.split << ',' << m.criterion << ',' << m.mean << ',' << m.count << '\n';
    return os.str();
}

ReviewProgress ReviewStore::progress() const {
    std::shared_lock lock(mutex_);
    ReviewProgress p;
    for (TaskKind k : {TaskKind::SpanAnnotation, TaskKind::LikertReview}) {
        p.total[k] = 0;
        p.done[k] = 0;
    }
    for (const auto& [id, t] : tasks_) {
        ++p.total[t.kind];
        if (t.status == TaskStatus::Done) ++p.done[t.kind];
    }
    return p;
}

// ------------------------------------------------------------------ server

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message,
                std::optional<std::size_t> position = std::nullopt) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    if (position) j["position"] = *position;
    send_json(res, status, j);
}

// Maps store exceptions onto HTTP responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const MalformedMarkup& e) {
        send_error(res, 422, "MalformedMarkup", e.what(), e.position());
    } catch (const TextDrift& e) {
        send_error(res, 422, "TextDrift", e.what());
    } catch (const OutOfScale& e) {
        send_error(res, 422, "OutOfScale", e.what());
    } catch (const UnknownTask& e) {
        send_error(res, 404, "UnknownTask", e.what());
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
    } catch (const Error& e) {
        send_error(res, 400, "BadRequest", e.what());
    }
}

nlohmann::ordered_json task_json(const ReviewTask& t, const std::optional<AnnotatedSample>& sample) {
    nlohmann::ordered_json j;
    j["task_id"] = t.task_id;
    j["sample_id"] = t.sample_id;
    j["reviewer"] = t.reviewer;
    j["kind"] = to_string(t.kind);
    j["status"] = to_string(t.status);
    if (sample) {
        nlohmann::ordered_json payload;
        payload["text"] = sample->text;
        if (t.kind == TaskKind::LikertReview) {
            auto spans = nlohmann::ordered_json::array();
            for (const auto& s : sample->spans) spans.push_back(to_json(s));
            payload["spans"] = std::move(spans);
            payload["tagged"] = render_tagged(*sample).value;
        }
        j["payload"] = std::move(payload);
    }
    return j;
}

}  // namespace

ReviewServer::ReviewServer(ReviewStore& store, std::optional<std::filesystem::path> static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;

    srv.Get("/api/tasks", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::optional<std::string> reviewer;
            std::optional<TaskKind> kind;
            if (req.has_param("reviewer")) reviewer = req.get_param_value("reviewer");
            if (req.has_param("kind")) {
                kind = task_kind_from_string(req.get_param_value("kind"));
                if (!kind) return send_error(res, 400, "BadRequest", "unknown kind");
            }
            auto arr = nlohmann::ordered_json::array();
            for (const auto& t : store_.tasks(reviewer, kind)) arr.push_back(task_json(t, store_.sample(t.sample_id)));
            send_json(res, 200, arr);
        });
    });

    srv.Get(R"(/api/samples/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto sample = store_.sample(req.matches[1].str());
            if (!sample) return send_error(res, 404, "UnknownSample", "no sample '" + req.matches[1].str() + "'");
            send_json(res, 200, to_json(*sample));
        });
    });

    srv.Post("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = nlohmann::json::parse(req.body);
            const auto stored = store_.submit_annotation(body.at("task_id").get<std::string>(),
                                                         TaggedText{body.at("tagged").get<std::string>()});
            send_json(res, 200, to_json(stored));
        });
    });

    srv.Post("/api/likert", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = nlohmann::json::parse(req.body);
            const auto s = store_.submit_likert(body.at("task_id").get<std::string>(), body.at("realism").get<int>(),
                                                body.at("fallacy_accuracy").get<int>(),
                                                body.at("span_accuracy").get<int>());
            nlohmann::ordered_json j;
            j["reviewer_id"] = s.reviewer_id;
            j["sample_id"] = s.sample_id;
            j["realism"] = s.realism;
            j["fallacy_accuracy"] = s.fallacy_accuracy;
            j["span_accuracy"] = s.span_accuracy;
            send_json(res, 200, j);
        });
    });

    srv.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto kind = req.get_param_value("kind");
            if (kind == "span_annotation") {
                std::string out;
                for (const auto& s : store_.export_annotations()) out += to_json(s).dump() + "\n";
                res.set_content(out, "application/x-ndjson");
            } else if (kind == "likert_review") {
                res.set_content(store_.export_likert_csv(), "text/csv");
            } else if (kind == "likert_means") {
                res.set_content(store_.likert_means_csv(), "text/csv");
            } else {
                send_error(res, 400, "BadRequest", "kind must be span_annotation, likert_review or likert_means");
            }
        });
    });

    srv.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
        const auto p = store_.progress();
        nlohmann::ordered_json j;
        std::size_t total = 0, done = 0;
        nlohmann::ordered_json by_kind;
        for (const auto& [kind, n] : p.total) {
            by_kind[std::string(to_string(kind))] = {{"total", n}, {"done", p.done.at(kind)}};
            total += n;
            done += p.done.at(kind);
        }
        j["total"] = total;
        j["done"] = done;
        j["pending"] = total - done;
        j["by_kind"] = std::move(by_kind);
        send_json(res, 200, j);
    });

    srv.Get("/api/config", [this](const httplib::Request&, httplib::Response& res) {
        nlohmann::ordered_json j;
        j["likert_points"] = store_.likert_points();
        auto labels = nlohmann::ordered_json::array();
        for (Tier1 l : kTier1Labels) labels.push_back(tag_name(l));
        j["labels"] = std::move(labels);
        j["criteria"] = kCriteria;
        send_json(res, 200, j);
    });

    if (static_dir) srv.set_mount_point("/", static_dir->string());
}

ReviewServer::~ReviewServer() { stop(); }

bool ReviewServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int ReviewServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool ReviewServer::listen_after_bind() { return server_->listen_after_bind(); }

void ReviewServer::stop() {
    if (server_) server_->stop();
}

void ReviewServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace slurg
