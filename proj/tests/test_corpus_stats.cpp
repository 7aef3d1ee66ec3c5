#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slurg/corpus_stats.hpp"
#include "slurg/dataset_ops.hpp"
#include "slurg/errors.hpp"
#include "support/test_support.hpp"

using namespace slurg;
using slurg::testing::fixture;
using slurg::testing::repo_root;
using slurg::testing::sample;

namespace {

Corpus texts(std::initializer_list<const char*> items) {
    Corpus c;
    std::size_t i = 0;
    for (const char* t : items) c.samples.push_back(sample("s" + std::to_string(i++), t));
    return c;
}

TokenizerConfig no_stopwords() {
    TokenizerConfig cfg;
    cfg.stopwords = StopwordList::none();
    return cfg;
}

}  // namespace

TEST_SUITE("corpus_stats") {
    TEST_CASE("english stopword list matches data file") {
        const auto built_in = StopwordList::english();
        const auto file = StopwordList::from_file(repo_root() / "data/stopwords/english_v1.txt");
        CHECK(built_in.words.size() == 179);
        CHECK(built_in.words == file.words);
        CHECK(built_in.sha256 == "8a7a2fb4e7a8575a4875dbd33b9c5abc778760ebaeb0e9a539b4694fcec6ee13");
        CHECK(built_in.sha256 == file.sha256);
        CHECK(built_in.contains("the"));
        CHECK_FALSE(built_in.contains("coffee"));
    }

    TEST_CASE("tokenizer") {
        CHECK(tokenize("Don't PANIC, it's 42!", true) ==
              std::vector<std::string>{"don", "t", "panic", "it", "s", "42"});
        CHECK(tokenize("Hello World", false) == std::vector<std::string>{"Hello", "World"});
        CHECK(tokenize("Привет мир", true) == std::vector<std::string>{"привет", "мир"});
        CHECK(content_tokens("The dog and the cat", TokenizerConfig{}) ==
              std::vector<std::string>{"dog", "cat"});
    }

    TEST_CASE("sentence splitting") {
        CHECK(split_sentences("One. Two! Three?").size() == 3);
        CHECK(split_sentences("No terminator").size() == 1);
        CHECK(split_sentences("").empty());
    }

    TEST_CASE("top-k frequencies") {
        const auto top = token_frequencies(texts({"war war peace"}), TokenizerConfig{}, 5);
        REQUIRE(top.size() == 2);
        CHECK(top[0] == TokenCount{"war", 2});
        CHECK(top[1] == TokenCount{"peace", 1});
        const auto tie = token_frequencies(texts({"b a c"}), no_stopwords(), 2);
        CHECK(tie == std::vector<TokenCount>{{"a", 1}, {"b", 1}});
    }

    TEST_CASE("vocabulary diversity") {
        CHECK(vocab_diversity(texts({"a a a"}), no_stopwords()) == doctest::Approx(1.0 / 3.0));
        CHECK(vocab_diversity(texts({"alpha beta", "gamma delta"}), TokenizerConfig{}) == 1.0);
        CHECK_THROWS_AS(vocab_diversity(texts({"the and of"}), TokenizerConfig{}), EmptyAfterFiltering);
    }

    TEST_CASE("hapax ratio") {
        const auto h = hapax_ratio(texts({"cat cat dog"}), TokenizerConfig{});
        REQUIRE(h.per_sentence.size() == 1);
        CHECK(h.per_sentence[0].hapaxes == 1);
        CHECK(h.per_sentence[0].tokens == 3);
        CHECK(*h.mean == doctest::Approx(1.0 / 3.0));
        const auto distinct = hapax_ratio(texts({"red green blue. cat cat dog"}), TokenizerConfig{});
        REQUIRE(distinct.per_sentence.size() == 2);
        CHECK(distinct.per_sentence[0].ratio == 1.0);
        CHECK(*distinct.mean == doctest::Approx((1.0 + 1.0 / 3.0) / 2.0));
        CHECK_FALSE(hapax_ratio(texts({"the of and"}), TokenizerConfig{}).mean.has_value());
    }

    TEST_CASE("chunker on a tagged sentence") {
        const PosSentence s{{"the", "DT"}, {"dog", "NN"}, {"ran", "VBD"}};
        const auto d = phrase_distribution(std::vector<std::vector<PosSentence>>{{s}});
        CHECK(d.total == 2);
        CHECK(d.proportions[static_cast<std::size_t>(PhraseType::NP)] == 0.5);
        CHECK(d.proportions[static_cast<std::size_t>(PhraseType::VP)] == 0.5);
        CHECK(d.proportions[static_cast<std::size_t>(PhraseType::PP)] == 0.0);
        const auto empty = phrase_distribution(std::vector<std::vector<PosSentence>>{});
        CHECK(empty.total == 0);
        for (double p : empty.proportions) CHECK(p == 0.0);
    }

    TEST_CASE("chunker finds PP and SBAR") {
        const PosSentence s{{"I", "PRP"},  {"think", "VBP"}, {"that", "IN"}, {"cats", "NNS"},
                            {"sit", "VBP"}, {"on", "IN"},     {"mats", "NNS"}};
        const auto chunks = chunk(s);
        CHECK(std::find(chunks.begin(), chunks.end(), PhraseType::SBAR) != chunks.end());
        CHECK(chunks == std::vector<PhraseType>{PhraseType::NP, PhraseType::VP, PhraseType::SBAR,
                                                PhraseType::NP, PhraseType::VP});
        const PosSentence p{{"on", "IN"}, {"the", "DT"}, {"mat", "NN"}};
        CHECK(chunk(p) == std::vector<PhraseType>{PhraseType::PP});
    }

    TEST_CASE("pos sidecar parsing") {
        std::istringstream in("# s0\nthe\tDT\ndog\tNN\n\nran\tVBD\n# s1\ncats\tNNS\n");
        const auto side = read_pos_sidecar(in);
        REQUIRE(side.size() == 2);
        CHECK(side.at("s0").size() == 2);
        CHECK(side.at("s0")[0][1].pos == "NN");
        CHECK(side.at("s1")[0][0].token == "cats");
        std::istringstream bad("the\tDT\n");
        CHECK_THROWS_AS(read_pos_sidecar(bad), SchemaViolation);
    }

    TEST_CASE("sidecar coverage and tagger fallback") {
        const auto c = texts({"the dog ran", "a cat sat"});
        std::istringstream in("# s0\nthe\tDT\ndog\tNN\nran\tVBD\n");
        const auto side = read_pos_sidecar(in);
        CHECK_THROWS_AS(phrase_distribution(c, &side, false), MissingPos);
        CHECK(phrase_distribution(c, &side, true).total > 0);
        CHECK(phrase_distribution(c, nullptr, true).total > 0);
        CHECK_THROWS_AS(phrase_distribution(c, nullptr, false), MissingPos);
    }

    TEST_CASE("fixture corpus matches independent counter") {
        std::ifstream f(fixture("corpus/comments50.expected.json"));
        const auto expected = nlohmann::json::parse(f);
        const auto corpus = ingest(fixture("corpus/comments50.jsonl"), Source::Reddit).corpus;
        const auto report = compute_stats(corpus, TokenizerConfig{}, 5);
        REQUIRE(report.top_k.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(report.top_k[i].first == expected["top5"][i]["token"].get<std::string>());
            CHECK(report.top_k[i].second == expected["top5"][i]["count"].get<std::size_t>());
        }
        CHECK(report.total_tokens == expected["total_tokens"].get<std::size_t>());
        CHECK(*report.vocab_diversity == doctest::Approx(expected["vocab_diversity"].get<double>()).epsilon(1e-12));
        const auto j = report.to_json();
        CHECK(j["stopwords"]["list"] == "english-v1");
        CHECK(report.hapax_csv().rfind("sample_id,sentence,tokens,hapaxes,ratio\n", 0) == 0);
        CHECK(report.phrase_csv().rfind("phrase,count,proportion\nNP,", 0) == 0);
    }
}
