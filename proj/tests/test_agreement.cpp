#include <doctest.h>

#include <cmath>

#include "slurg/agreement.hpp"
#include "slurg/errors.hpp"
#include "support/fixtures.hpp"
#include "support/test_support.hpp"

using namespace slurg;
using namespace slurg::testing;

namespace {

std::string bits_string(const LabelMask& m) {
    std::string s;
    for (bool b : m.bits()) s += b ? '1' : '0';
    return s;
}

LabelMask mask_of(std::size_t n, std::size_t b, std::size_t e) {
    LabelMask m(n);
    m.cover(b, e);
    return m;
}

}  // namespace

TEST_SUITE("agreement") {
    TEST_CASE("label masks") {
        CHECK(bits_string(label_mask(sample("s", "abcdef"), Tier1::Logical)) == "000000");
        CHECK(bits_string(label_mask(sample("s", "abcdef", {span(2, 5, Tier1::Logical)}), Tier1::Logical)) ==
              "001110");
        CHECK(bits_string(label_mask(sample("s", "abcdef", {span(0, 6, Tier1::Emotional), span(2, 4, Tier1::Emotional)}),
                                     Tier1::Emotional)) == "111111");
        CHECK(bits_string(label_mask(sample("s", "abcdef", {span(2, 5, Tier1::Logical)}), Tier1::Emotional)) ==
              "000000");
    }

    TEST_CASE("jaccard basics") {
        CHECK(jaccard_iou(mask_of(20, 0, 10), mask_of(20, 0, 10)) == 1.0);
        CHECK(jaccard_iou(LabelMask(20), LabelMask(20)) == 1.0);
        CHECK(jaccard_iou(mask_of(20, 0, 10), mask_of(20, 5, 15)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(jaccard_iou(mask_of(20, 0, 10), LabelMask(20)) == 0.0);
        CHECK_THROWS_AS(jaccard_iou(LabelMask(3), LabelMask(4)), LengthMismatch);
    }

    TEST_CASE("interval IoU equals the per-character brute force") {
        Rng rng(21);
        for (int i = 0; i < 1000; ++i) {
            const std::size_t n = rng.uniform_index(64);
            const auto a = random_bits(rng, n);
            const auto b = random_bits(rng, n);
            const auto ma = LabelMask::from_bits(a);
            const auto mb = LabelMask::from_bits(b);
            CHECK(ma.bits() == a);
            CHECK(jaccard_iou(ma, mb) == brute_iou(a, b));
            CHECK(jaccard_iou(ma, mb) == jaccard_iou(mb, ma));
            CHECK(jaccard_iou(ma, ma) == 1.0);
        }
    }

    TEST_CASE("adding a shared span never lowers IoU") {
        Rng rng(22);
        for (int i = 0; i < 300; ++i) {
            const std::size_t n = 1 + rng.uniform_index(40);
            auto a = LabelMask::from_bits(random_bits(rng, n));
            auto b = LabelMask::from_bits(random_bits(rng, n));
            const double before = jaccard_iou(a, b);
            const std::size_t s = rng.uniform_index(n);
            const std::size_t e = s + 1 + rng.uniform_index(n - s);
            a.cover(s, e);
            b.cover(s, e);
            CHECK(jaccard_iou(a, b) >= before);
        }
    }

    TEST_CASE("hand-computed four-annotator matrix") {
        const auto fixture = agreement_fixture();
        const auto report = pairwise_agreement(group_by_annotator(fixture));
        REQUIRE(report.annotators == std::vector<std::string>{"A", "B", "C", "D"});
        for (const auto& [pair, expected] : agreement_expected()) {
            CHECK(std::abs(report.pair_scores.at(pair).overall - expected) <= 1e-12);
        }
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(report.matrix[i][i] == 1.0);
            for (std::size_t j = 0; j < 4; ++j) CHECK(report.matrix[i][j] == report.matrix[j][i]);
        }
        CHECK(std::abs(*report.matrix[0][3] - 407.0 / 450.0) <= 1e-12);
        for (const auto& [id, expected] : agreement_expected_per_sample())
            CHECK(std::abs(*report.sample_agreement(id) - expected) <= 1e-12);
        CHECK(report.pair_scores.at({"A", "D"}).shared_samples == 5);
        CHECK(report.pair_scores.at({"B", "D"}).shared_samples == 4);
    }

    TEST_CASE("pair with one label disagreeing on one sample scores 2/3") {
        const std::vector<AnnotatedSample> anns{sample("x", "abcdef", {span(0, 3, Tier1::Logical)}, "p"),
                                                sample("x", "abcdef", {}, "q")};
        const auto r = pairwise_agreement(group_by_annotator(anns));
        CHECK(r.pair_scores.at({"p", "q"}).overall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }

    TEST_CASE("identical annotators agree perfectly") {
        std::vector<AnnotatedSample> anns;
        for (const char* a : {"p", "q"}) {
            anns.push_back(sample("x", "abcdef", {span(0, 3, Tier1::Logical)}, a));
            anns.push_back(sample("y", "ghijkl", {span(1, 2, Tier1::Emotional)}, a));
        }
        const auto r = pairwise_agreement(group_by_annotator(anns));
        CHECK(r.pair_scores.at({"p", "q"}).overall == 1.0);
    }

    TEST_CASE("annotator with wider spans has the lowest row") {
        std::vector<AnnotatedSample> anns;
        const std::string text(30, 'x');
        for (int k = 0; k < 5; ++k) {
            const std::string id = "w" + std::to_string(k);
            for (const char* a : {"1", "2", "3"}) anns.push_back(sample(id, text, {span(5, 10, Tier1::Emotional)}, a));
            anns.push_back(sample(id, text, {span(2, 16, Tier1::Emotional)}, "4"));
        }
        const auto r = pairwise_agreement(group_by_annotator(anns));
        std::vector<double> row_mean(4, 0.0);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                if (i != j) row_mean[i] += *r.matrix[i][j] / 3.0;
        for (std::size_t i = 0; i < 3; ++i) CHECK(row_mean[3] < row_mean[i]);
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS(pairwise_agreement(group_by_annotator(std::vector<AnnotatedSample>{
                            sample("x", "abc", {}, "p"), sample("x", "abd", {}, "q")})),
                        TextMismatch);
        CHECK_THROWS_AS(pairwise_agreement(group_by_annotator(std::vector<AnnotatedSample>{
                            sample("x", "abc", {}, "p"), sample("y", "abc", {}, "q")})),
                        NoSharedSamples);
        CHECK_THROWS_AS(pairwise_agreement(group_by_annotator(std::vector<AnnotatedSample>{sample("x", "abc", {}, "p")})),
                        NoSharedSamples);
    }

    TEST_CASE("gold selection") {
        const auto sets = group_by_annotator(agreement_fixture());
        const auto report = pairwise_agreement(sets);
        const auto gold = select_gold(sets, report, 0.8, 42);
        std::vector<std::string> ids;
        for (const auto& s : gold.samples) ids.push_back(s.sample_id);
        CHECK(ids == std::vector<std::string>{"s1", "s2", "s5", "s6"});
        CHECK(select_gold(sets, report, 0.8, 42).samples == gold.samples);
        for (const auto& s : gold.samples) {
            const auto& own = sets.at(s.annotator_id);
            REQUIRE(own.find(s.sample_id) != nullptr);
            CHECK(*own.find(s.sample_id) == s);
        }
        CHECK(select_gold(sets, report, 0.0, 1).size() == 6);
    }

    TEST_CASE("agreement equal to the threshold is excluded") {
        const auto sets = group_by_annotator(agreement_fixture());
        const auto report = pairwise_agreement(sets);
        const double s2 = *report.sample_agreement("s2");
        const auto gold = select_gold(sets, report, s2, 1);
        CHECK(gold.find("s2") == nullptr);
        CHECK(gold.find("s5") != nullptr);
    }

    TEST_CASE("different seeds can pick different annotators") {
        const auto sets = group_by_annotator(agreement_fixture());
        bool differs = false;
        const auto base = select_gold(sets, 0.8, 0);
        for (std::uint64_t seed = 1; seed < 20 && !differs; ++seed)
            differs = select_gold(sets, 0.8, seed).samples != base.samples;
        CHECK(differs);
    }

    TEST_CASE("csv matrix") {
        const auto r = pairwise_agreement(group_by_annotator(agreement_fixture()));
        const auto csv = r.matrix_csv();
        CHECK(csv.rfind("annotator,A,B,C,D\n", 0) == 0);
    }
}
