#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "slurg/span_model.hpp"
#include "slurg/tag_codec.hpp"

namespace httplib {
class Server;
}

namespace slurg {

enum class TaskKind { SpanAnnotation, LikertReview };
enum class TaskStatus { Pending, Done };

std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> task_kind_from_string(std::string_view s) noexcept;
std::string_view to_string(TaskStatus status) noexcept;

struct ReviewTask {
    std::string task_id;
    std::string sample_id;
    std::string reviewer;
    TaskKind kind = TaskKind::SpanAnnotation;
    TaskStatus status = TaskStatus::Pending;
};

struct LikertScore {
    int realism = 0;
    int fallacy_accuracy = 0;
    int span_accuracy = 0;
    std::string reviewer_id;
    std::string sample_id;
};

struct LikertMean {
    std::string split;
    std::string criterion;
    double mean = 0.0;
    std::size_t count = 0;
};

struct ReviewProgress {
    std::map<TaskKind, std::size_t> total;
    std::map<TaskKind, std::size_t> done;
};

/// Review state backed by `<dir>/events.jsonl`. Every change is appended as
/// one event and the in-memory index is rebuilt from the log on open; the
/// last submission per task wins. Thread-safe: one writer at a time, readers
/// see a consistent snapshot.
class ReviewStore {
public:
    explicit ReviewStore(std::filesystem::path dir, int likert_points = 4);

    int likert_points() const noexcept { return likert_points_; }

    /// One task per (sample, reviewer); already-known tasks are left alone.
    /// Returns the number of tasks for this corpus/kind/reviewer set.
    std::size_t enqueue_tasks(const Corpus& corpus, TaskKind kind, const std::vector<std::string>& reviewers);

    std::vector<ReviewTask> tasks(const std::optional<std::string>& reviewer = std::nullopt,
                                  const std::optional<TaskKind>& kind = std::nullopt) const;
    std::optional<ReviewTask> task(const std::string& task_id) const;
    std::optional<AnnotatedSample> sample(const std::string& sample_id) const;

    /// Throws UnknownTask, MalformedMarkup (strict parse) or TextDrift.
    AnnotatedSample submit_annotation(const std::string& task_id, const TaggedText& tagged);
    /// Throws UnknownTask or OutOfScale. Reviewer and sample come from the task.
    LikertScore submit_likert(const std::string& task_id, int realism, int fallacy_accuracy, int span_accuracy);

    std::vector<AnnotatedSample> export_annotations() const;
    std::vector<LikertScore> likert_scores() const;
    /// split,reviewer,sample_id,criterion,value
    std::string export_likert_csv() const;
    /// Mean per criterion per split, plus an `overall` criterion averaging
    /// the three.
    std::vector<LikertMean> likert_means() const;
    std::string likert_means_csv() const;
    ReviewProgress progress() const;

private:
    void apply(const nlohmann::json& event);
    void append_event(const nlohmann::ordered_json& event);
    std::string split_of(const std::string& sample_id) const;

    std::filesystem::path log_path_;
    int likert_points_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, AnnotatedSample> samples_;
    std::map<std::string, ReviewTask> tasks_;
    std::map<std::string, AnnotatedSample> annotations_;  // by task id
    std::map<std::string, LikertScore> likert_;            // by task id
};

std::string make_task_id(TaskKind kind, const std::string& reviewer, const std::string& sample_id);

/// HTTP+JSON front end over a ReviewStore:
///   GET  /api/tasks?reviewer=X&kind=K    GET  /api/samples/{id}
///   POST /api/annotations                POST /api/likert
///   GET  /api/export?kind=K              GET  /api/progress
///   GET  /api/config
/// plus static files from `static_dir` at `/`.
class ReviewServer {
public:
    explicit ReviewServer(ReviewStore& store,
                          std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it; call listen_after_bind() next.
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    ReviewStore& store_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace slurg
