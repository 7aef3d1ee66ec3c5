#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "slurg/errors.hpp"
#include "slurg/pipeline.hpp"
#include "support/run_compare.hpp"
#include "support/test_support.hpp"

using namespace slurg;
using namespace slurg::testing;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("slurg_test_pipeline_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

PipelineOptions quiet_options(std::string stamp) {
    PipelineOptions o;
    o.clock = [stamp] { return stamp; };
    o.sleep = [](std::chrono::milliseconds) {};
    return o;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SLURG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("mock run is reproducible") {
        const auto config = PipelineConfig::load(fixture("pipeline/config.json"));
        const auto a = fresh_dir("a");
        const auto b = fresh_dir("b");
        const auto ra = pipeline_run(config, a, quiet_options("2000-01-01T00:00:00Z"));
        pipeline_run(config, b, quiet_options("2001-02-03T04:05:06Z"));
        CHECK(run_differences(a, b).empty());
        REQUIRE(ra.evals.size() == 4);
        for (const auto& e : ra.evals) {
            CHECK(e.strict.f1 == 1.0);
            CHECK(e.relaxed.f1 == 1.0);
        }
        CHECK(ra.annotation_failures == 0);
        CHECK(ra.generation_failures == 0);
        for (const auto& [split, corpus] : ra.synthetic) CHECK(corpus.size() == 4);
        for (const char* f : {"report.json", "report.txt", "f1_table.csv", "manifest.json", "04_gold/gold.jsonl",
                              "03_agreement/agreement.json", "08_stats/real.json", "08_stats/synthetic.json"})
            CHECK_MESSAGE(std::filesystem::exists(a / f), f);
        std::filesystem::remove_all(a);
        std::filesystem::remove_all(b);
    }

    TEST_CASE("existing output is not overwritten") {
        const auto config = PipelineConfig::load(fixture("pipeline/config.json"));
        const auto dir = fresh_dir("force");
        pipeline_run(config, dir, quiet_options("t"));
        CHECK_THROWS_AS(pipeline_run(config, dir, quiet_options("t")), Error);
        auto opts = quiet_options("t");
        opts.force = true;
        CHECK_NOTHROW(pipeline_run(config, dir, opts));
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("failing stage is named and keeps its exit code") {
        auto config = PipelineConfig::load(fixture("pipeline/config.json"));
        config.annotations = "/nonexistent/annotations.jsonl";
        const auto dir = fresh_dir("fail");
        std::vector<std::string> stages;
        auto opts = quiet_options("t");
        opts.on_stage = [&](const std::string& s) { stages.push_back(s); };
        try {
            pipeline_run(config, dir, opts);
            FAIL("expected a stage failure");
        } catch (const StageFailure& e) {
            CHECK(e.stage() == "ingest");
            CHECK(e.exit_code() == 1);
        }
        CHECK(stages.back() == "ingest");
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("gold threshold that keeps nothing") {
        auto config = PipelineConfig::load(fixture("pipeline/config.json"));
        config.gold_threshold = 1.0;
        const auto dir = fresh_dir("empty");
        try {
            pipeline_run(config, dir, quiet_options("t"));
            FAIL("expected a stage failure");
        } catch (const StageFailure& e) {
            CHECK(e.stage() == "gold");
            CHECK(e.exit_code() == 1);
        }
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("config errors") {
        CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse("{}")), ConfigError);
        CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/config.json"), Error);
    }

    TEST_CASE("cli exit codes") {
        const auto cfg = fixture("pipeline/config.json").string();
        const auto dir = fresh_dir("cli");
        CHECK(run_cli("--version") == 0);
        CHECK(run_cli("pipeline --config " + cfg + " --out-dir " + dir.string()) == 0);
        CHECK(run_cli("pipeline --config " + cfg + " --out-dir " + dir.string()) == 2);
        CHECK(run_cli("pipeline --config " + cfg + " --out-dir " + dir.string() + " --force") == 0);
        CHECK(run_cli("report --run " + dir.string()) == 0);
        CHECK(run_cli("no-such-command") == 2);

        const auto bad = dir / "bad.jsonl";
        std::ofstream(bad) << R"({"sample_id":"a","text":"x","source":"reddit"})" << "\n"
                     << R"({"sample_id":"a","text":"y","source":"reddit"})" << "\n";
        CHECK(run_cli("ingest --input " + bad.string() + " --out-dir " + (dir / "ing").string()) == 1);

        const auto dead = dir / "dead.json";
        std::ofstream(dead) << R"({"transport":{"kind":"http","endpoint":"http://127.0.0.1:9/v1","model":"m",)"
                            << R"("timeout_s":1,"max_attempts":1}})";
        CHECK(run_cli("annotate --split " + (dir / "05_splits/80_20").string() + " --config " + dead.string() +
                      " --out-dir " + (dir / "ann").string()) == 3);
        std::filesystem::remove_all(dir);
    }
}
