#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "slurg/dataset_ops.hpp"
#include "slurg/errors.hpp"
#include "support/test_support.hpp"

using namespace slurg;
using slurg::testing::sample;
using slurg::testing::span;

namespace {

Corpus numbered(std::size_t n, std::size_t text_len = 40) {
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        std::ostringstream id;
        id << "id" << i;
        c.samples.push_back(sample(id.str(), std::string(text_len, 'a')));
    }
    return c;
}

std::set<std::string> ids(const Corpus& c) {
    std::set<std::string> out;
    for (const auto& s : c.samples) out.insert(s.sample_id);
    return out;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("slurg_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_SUITE("dataset_ops") {
    TEST_CASE("ingest valid lines") {
        std::istringstream in(
            R"({"sample_id":"a","text":"one","source":"reddit"})"
            "\n"
            R"({"sample_id":"b","text":"two","source":"fourchan","spans":[{"start":0,"end":3,"label":"logical_fallacy"}]})"
            "\n\n"
            R"({"sample_id":"c","text":"three","source":"4chan"})"
            "\n");
        const auto r = ingest(in, IngestOptions{});
        CHECK(r.corpus.size() == 3);
        CHECK(r.rejects.empty());
        CHECK(r.corpus.samples[1].spans.size() == 1);
        CHECK(r.corpus.samples[2].source == Source::Fourchan);
    }

    TEST_CASE("out-of-bounds span goes to rejects") {
        std::istringstream in(
            R"({"sample_id":"a","text":"abc","source":"reddit","spans":[{"start":0,"end":9,"label":"logical_fallacy"}]})"
            "\n"
            "not json\n"
            R"({"sample_id":"b","text":"fine","source":"reddit"})"
            "\n");
        const auto r = ingest(in, IngestOptions{});
        CHECK(r.corpus.size() == 1);
        REQUIRE(r.rejects.size() == 2);
        CHECK(r.rejects[0].line == 1);
        CHECK_FALSE(r.rejects[0].reason.empty());
        CHECK(r.rejects[1].line == 2);
    }

    TEST_CASE("duplicate id is a schema violation") {
        std::istringstream in(R"({"sample_id":"a","text":"x","source":"reddit"})"
                              "\n"
                              R"({"sample_id":"a","text":"y","source":"reddit"})"
                              "\n");
        CHECK_THROWS_AS(ingest(in, IngestOptions{}), SchemaViolation);
    }

    TEST_CASE("default source and missing file") {
        std::istringstream in(R"({"sample_id":"a","text":"x"})"
                              "\n");
        IngestOptions opts;
        opts.default_source = Source::Fourchan;
        const auto r = ingest(in, opts);
        REQUIRE(r.corpus.size() == 1);
        CHECK(r.corpus.samples[0].source == Source::Fourchan);
        CHECK_THROWS_AS(ingest(std::filesystem::path("/nonexistent/file.jsonl"), Source::Reddit), IoFailure);
    }

    TEST_CASE("length filter is strict") {
        Corpus c;
        c.samples.push_back(sample("a", std::string(32, 'x')));
        c.samples.push_back(sample("b", std::string(33, 'x')));
        c.samples.push_back(sample("c", std::string(31, 'x') + "é"));
        const auto kept = filter_min_length(c, 32);
        REQUIRE(kept.size() == 1);
        CHECK(kept.samples[0].sample_id == "b");
        CHECK(filter_min_length(Corpus{}, 32).empty());
    }

    TEST_CASE("annotation batch draw") {
        const auto c = numbered(20);
        const auto whole = sample_annotation_batch(c, 20, 3);
        CHECK(ids(whole) == ids(c));
        CHECK(sample_annotation_batch(c, 7, 3).samples == sample_annotation_batch(c, 7, 3).samples);
        CHECK(ids(sample_annotation_batch(c, 7, 3)).size() == 7);
        CHECK_THROWS_AS(sample_annotation_batch(c, 21, 3), NotEnoughSamples);
        const auto big = numbered(3790);
        CHECK(ids(sample_annotation_batch(big, 150, 1)).size() == 150);
    }

    TEST_CASE("split spec parsing and rounding") {
        const auto s = SplitSpec::parse("80/20", 7);
        CHECK(s.name == "80/20");
        CHECK(s.gold_fraction == doctest::Approx(0.8));
        CHECK(s.fewshot_fraction == doctest::Approx(0.2));
        CHECK(s.dir_name() == "80_20");
        CHECK(SplitSpec::parse("4/1", 7).fewshot_fraction == doctest::Approx(0.2));
        CHECK_THROWS_AS(SplitSpec::parse("0/0", 7), ConfigError);
        CHECK_THROWS_AS(SplitSpec::parse("-1/2", 7), ConfigError);
        CHECK_THROWS_AS(SplitSpec::parse("eighty", 7), ConfigError);
        CHECK(SplitSpec::parse("70/30", 0).fewshot_count(10) == 3);
        CHECK(SplitSpec::parse("90/10", 0).fewshot_count(15) == 2);
        CHECK(SplitSpec::parse("90/10", 0).fewshot_count(24) == 2);
        CHECK(SplitSpec::parse("80/20", 0).fewshot_count(24) == 5);
    }

    TEST_CASE("splits partition the corpus") {
        const auto c = numbered(10);
        const auto s100 = make_split(c, SplitSpec::parse("100/0", 1));
        CHECK(s100.fewshot.empty());
        CHECK(s100.gold.samples == c.samples);
        const auto s80 = make_split(c, SplitSpec::parse("80/20", 1));
        CHECK(s80.fewshot.size() == 2);
        CHECK(s80.gold.size() == 8);
        const auto s70 = make_split(c, SplitSpec::parse("70/30", 1));
        CHECK(s70.fewshot.size() == 3);
        CHECK(s70.gold.size() == 7);
        auto all = ids(s70.gold);
        for (const auto& id : ids(s70.fewshot)) CHECK(all.insert(id).second);
        CHECK(all == ids(c));
    }

    TEST_CASE("split halves keep input order") {
        const auto c = numbered(30);
        const auto s = make_split(c, SplitSpec::parse("70/30", 9));
        auto position = [&](const std::string& id) {
            for (std::size_t i = 0; i < c.size(); ++i)
                if (c.samples[i].sample_id == id) return i;
            return c.size();
        };
        for (const auto* half : {&s.gold, &s.fewshot})
            for (std::size_t i = 1; i < half->size(); ++i)
                CHECK(position(half->samples[i - 1].sample_id) < position(half->samples[i].sample_id));
    }

    TEST_CASE("standard splits on 100 samples") {
        const auto c = numbered(100);
        std::vector<std::size_t> sizes;
        for (const auto& spec : standard_splits(5)) {
            const auto a = make_split(c, spec);
            const auto b = make_split(c, spec);
            CHECK(a.gold.samples == b.gold.samples);
            CHECK(a.fewshot.samples == b.fewshot.samples);
            sizes.push_back(a.fewshot.size());
        }
        CHECK(sizes == std::vector<std::size_t>{0, 10, 20, 30});
    }

    TEST_CASE("split files round-trip") {
        const auto dir = temp_dir("split");
        const auto c = numbered(10);
        const auto s = make_split(c, SplitSpec::parse("80/20", 4));
        write_split(s, dir);
        CHECK(std::filesystem::exists(dir / "gold.jsonl"));
        CHECK(std::filesystem::exists(dir / "fewshot.jsonl"));
        CHECK(std::filesystem::exists(dir / "split.meta.json"));
        const auto back = read_split(dir);
        CHECK(back.gold.samples == s.gold.samples);
        CHECK(back.fewshot.samples == s.fewshot.samples);
        CHECK(back.spec.name == "80/20");
        CHECK(back.spec.seed == 4);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("jsonl writer output re-ingests") {
        const auto s = sample("x", "Жук text", {span(0, 3, Tier1::Emotional)}, "a");
        std::istringstream in(to_jsonl({s}));
        const auto r = ingest(in, IngestOptions{});
        REQUIRE(r.corpus.size() == 1);
        CHECK(r.corpus.samples[0] == s);
    }
}
