#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slurg/span_model.hpp"
#include "support/test_support.hpp"

namespace slurg::testing {

// Four annotators, six samples over the text "0123456789". Per-label IoUs,
// pair means and the resulting matrix are worked out by hand below.
//
// s1  all four: E[0,10)                      every pair 1
// s2  A,B L[0,4)  C L[0,2)  D L[0,8)         L: AB 1, AC 1/2, AD 1/2, BC 1/2, BD 1/2, CD 1/4
//                                            pair: AB 1, AC AD BC BD 5/6, CD 3/4
// s3  A,C Cr[2,6)  B Cr[2,6)+E[0,10)  D Cr[0,10)
//                                            Cr: AB AC BC 1, AD BD CD 2/5
//                                            E:  AB BC BD 0, AC AD CD 1
//                                            pair: AB 2/3, AC 1, AD 4/5, BC 2/3, BD 7/15, CD 4/5
// s4  A,C L[0,5)  B L[5,10)   (no D)         pair: AB 2/3, AC 1, BC 2/3
// s5  A E[0,3)+E[6,9)  D E[0,9)  (A,D only)   E 6/9; pair AD 8/9
// s6  all four, no spans                     every pair 1
//
// AB (1 + 1 + 2/3 + 2/3 + 1) / 5        = 13/15
// AC (1 + 5/6 + 1 + 1 + 1) / 5          = 29/30
// AD (1 + 5/6 + 4/5 + 8/9 + 1) / 5      = 407/450
// BC (1 + 5/6 + 2/3 + 2/3 + 1) / 5      = 5/6
// BD (1 + 5/6 + 7/15 + 1) / 4           = 33/40
// CD (1 + 3/4 + 4/5 + 1) / 4            = 71/80
//
// Per-sample agreement (mean over covering pairs): s1 1, s2 61/72, s3 11/15,
// s4 7/9, s5 8/9, s6 1. Above 0.8: s1 s2 s5 s6.
inline std::vector<AnnotatedSample> agreement_fixture() {
    const std::string text = "0123456789";
    const auto C = Tier1::Credibility;
    const auto L = Tier1::Logical;
    const auto E = Tier1::Emotional;
    std::vector<AnnotatedSample> out;
    auto add = [&](const std::string& id, const std::string& ann, std::vector<Span> spans) {
        out.push_back(sample(id, text, std::move(spans), ann));
    };
    for (const char* a : {"A", "B", "C", "D"}) add("s1", a, {span(0, 10, E)});
    add("s2", "A", {span(0, 4, L)});
    add("s2", "B", {span(0, 4, L)});
    add("s2", "C", {span(0, 2, L)});
    add("s2", "D", {span(0, 8, L)});
    add("s3", "A", {span(2, 6, C)});
    add("s3", "B", {span(2, 6, C), span(0, 10, E)});
    add("s3", "C", {span(2, 6, C)});
    add("s3", "D", {span(0, 10, C)});
    add("s4", "A", {span(0, 5, L)});
    add("s4", "B", {span(5, 10, L)});
    add("s4", "C", {span(0, 5, L)});
    add("s5", "A", {span(0, 3, E), span(6, 9, E)});
    add("s5", "D", {span(0, 9, E)});
    for (const char* a : {"A", "B", "C", "D"}) add("s6", a, {});
    return out;
}

inline std::map<std::pair<std::string, std::string>, double> agreement_expected() {
    return {{{"A", "B"}, 13.0 / 15.0}, {{"A", "C"}, 29.0 / 30.0}, {{"A", "D"}, 407.0 / 450.0},
            {{"B", "C"}, 5.0 / 6.0},   {{"B", "D"}, 33.0 / 40.0},  {{"C", "D"}, 71.0 / 80.0}};
}

inline std::map<std::string, double> agreement_expected_per_sample() {
    return {{"s1", 1.0}, {"s2", 61.0 / 72.0}, {"s3", 11.0 / 15.0}, {"s4", 7.0 / 9.0}, {"s5", 8.0 / 9.0}, {"s6", 1.0}};
}

struct F1Fixture {
    Corpus gold;
    Corpus pred;
};

// Twelve gold/prediction cases with hand-derived counts:
//  1 exact                      g E[0,10)             p E[0,10)            tp 1  mass 1
//  2 half overlap               g E[0,10)             p E[0,5)             tp 0  mass 1/2
//  3 label mismatch             g E[0,10)             p L[0,10)            tp 0  mass 0
//  4 missed                     g L[0,10)             p -                  tp 0  mass 0
//  5 spurious                   g -                   p Cr[2,6)            tp 0  mass 0
//  6 nothing on either side     g -                   p -
//  7 nested exact               g E[0,20) Cr[5,10)    p same               tp 2  mass 2
//  8 start off by two           g L[0,8)              p L[2,8)             tp 0  mass 3/4
//  9 two gold, one wide pred    g E[0,8) E[12,16)     p E[0,16)            tp 0  mass 1/2 (1/2 beats 1/4)
// 10 one gold, two preds        g Cr[0,8)             p Cr[0,2) Cr[2,8)    tp 0  mass 3/4 (3/4 beats 1/4)
// 11 drifted text               g L[0,10)             p L[0,10) on other text: no matches
// 12 multi-label               g E[0,10) L[0,10)     p E[0,10) Cr[0,10)   tp 1  mass 1
// n_gold 13, n_pred 13, strict tp 4, relaxed mass 13/2.
// Per label (gold, pred, tp, mass): E 7 5 3 4; L 4 3 0 3/4; Cr 2 5 1 7/4.
inline F1Fixture f1_fixture() {
    const auto C = Tier1::Credibility;
    const auto L = Tier1::Logical;
    const auto E = Tier1::Emotional;
    const std::string t(20, 'x');
    F1Fixture f;
    auto add = [&](const std::string& id, std::vector<Span> g, std::vector<Span> p, std::string pred_text = {}) {
        f.gold.samples.push_back(sample(id, t, std::move(g), "gold"));
        f.pred.samples.push_back(sample(id, pred_text.empty() ? t : pred_text, std::move(p), "model"));
    };
    add("f01", {span(0, 10, E)}, {span(0, 10, E)});
    add("f02", {span(0, 10, E)}, {span(0, 5, E)});
    add("f03", {span(0, 10, E)}, {span(0, 10, L)});
    add("f04", {span(0, 10, L)}, {});
    add("f05", {}, {span(2, 6, C)});
    add("f06", {}, {});
    add("f07", {span(0, 20, E), span(5, 10, C)}, {span(0, 20, E), span(5, 10, C)});
    add("f08", {span(0, 8, L)}, {span(2, 8, L)});
    add("f09", {span(0, 8, E), span(12, 16, E)}, {span(0, 16, E)});
    add("f10", {span(0, 8, C)}, {span(0, 2, C), span(2, 8, C)});
    add("f11", {span(0, 10, L)}, {span(0, 10, L)}, std::string(19, 'x') + "y");
    add("f12", {span(0, 10, E), span(0, 10, L)}, {span(0, 10, E), span(0, 10, C)});
    return f;
}

}  // namespace slurg::testing

namespace slurg::testing {

/// Gold and predictions over the same texts. Predictions reuse, shift or
/// relabel gold spans and add random ones, then are made valid.
inline F1Fixture random_eval_corpus(Rng& rng, std::size_t n_samples) {
    F1Fixture f;
    for (std::size_t i = 0; i < n_samples; ++i) {
        auto g = random_valid_sample(rng, 40);
        g.sample_id = "r" + std::to_string(i);
        AnnotatedSample p = g;
        p.spans.clear();
        const std::size_t len = g.char_length();
        for (const auto& s : g.spans) {
            switch (rng.uniform_index(4)) {
                case 0: p.spans.push_back(s); break;
                case 1: {
                    Span t = s;
                    if (t.start > 0 && rng.uniform_index(2) == 0) --t.start;
                    if (t.end < len && rng.uniform_index(2) == 0) ++t.end;
                    p.spans.push_back(t);
                    break;
                }
                case 2: p.spans.push_back(Span{s.start, s.end, FallacyLabel{random_label(rng), {}}}); break;
                default: break;
            }
        }
        if (len > 0 && rng.uniform_index(3) == 0) {
            const std::size_t b = rng.uniform_index(len);
            p.spans.push_back(span(b, b + 1 + rng.uniform_index(len - b), random_label(rng)));
        }
        // Keep the first span of every crossing or duplicate pair.
        p.normalize();
        std::vector<Span> kept;
        for (const auto& s : p.spans) {
            bool ok = true;
            for (const auto& k : kept) {
                const bool disjoint = s.end <= k.start || k.end <= s.start;
                const bool nested = k.contains(s) || s.contains(k);
                if ((!disjoint && !nested) || s == k) ok = false;
            }
            if (ok) kept.push_back(s);
        }
        p.spans = std::move(kept);
        f.gold.samples.push_back(std::move(g));
        f.pred.samples.push_back(std::move(p));
    }
    return f;
}

}  // namespace slurg::testing
