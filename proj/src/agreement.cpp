#include "slurg/agreement.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "slurg/errors.hpp"
#include "slurg/rng.hpp"

namespace slurg {

LabelMask LabelMask::from_bits(const std::vector<bool>& bits) {
    LabelMask mask(bits.size());
    for (std::size_t i = 0; i < bits.size();) {
        if (!bits[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < bits.size() && bits[j]) ++j;
        mask.runs_.emplace_back(i, j);
        i = j;
    }
    return mask;
}

void LabelMask::cover(std::size_t begin, std::size_t end) {
    end = std::min(end, length_);
    if (begin >= end) return;
    auto it = std::lower_bound(runs_.begin(), runs_.end(), begin,
                               [](const auto& run, std::size_t b) { return run.second < b; });
    // `it` is the first run that touches or follows begin.
    auto last = it;
    while (last != runs_.end() && last->first <= end) {
        begin = std::min(begin, last->first);
        end = std::max(end, last->second);
        ++last;
    }
    it = runs_.erase(it, last);
    runs_.insert(it, {begin, end});
}

std::size_t LabelMask::count() const noexcept {
    std::size_t n = 0;
    for (const auto& [b, e] : runs_) n += e - b;
    return n;
}

std::vector<bool> LabelMask::bits() const {
    std::vector<bool> out(length_, false);
    for (const auto& [b, e] : runs_)
        for (std::size_t i = b; i < e; ++i) out[i] = true;
    return out;
}

LabelMask label_mask(const AnnotatedSample& sample, Tier1 label) {
    LabelMask mask(sample.char_length());
    for (const auto& s : sample.spans)
        if (s.label.tier1 == label) mask.cover(s.start, s.end);
    return mask;
}

double jaccard_iou(const LabelMask& a, const LabelMask& b) {
    if (a.length() != b.length())
        throw LengthMismatch("mask lengths differ: " + std::to_string(a.length()) + " vs " +
                             std::to_string(b.length()));
    const auto& ra = a.runs();
    const auto& rb = b.runs();
    std::size_t inter = 0;
    for (std::size_t i = 0, j = 0; i < ra.size() && j < rb.size();) {
        const auto lo = std::max(ra[i].first, rb[j].first);
        const auto hi = std::min(ra[i].second, rb[j].second);
        if (lo < hi) inter += hi - lo;
        if (ra[i].second < rb[j].second)
            ++i;
        else
            ++j;
    }
    const std::size_t uni = a.count() + b.count() - inter;
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double mean(const LabelScores& s) { return (s[0] + s[1] + s[2]) / 3.0; }

std::string format_score(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::optional<double> AgreementReport::sample_agreement(const std::string& sample_id) const {
    auto it = per_sample.find(sample_id);
    if (it == per_sample.end() || it->second.empty()) return std::nullopt;
    double total = 0.0;
    for (const auto& [pair, scores] : it->second) total += mean(scores);
    return total / static_cast<double>(it->second.size());
}

nlohmann::ordered_json AgreementReport::to_json() const {
    nlohmann::ordered_json j;
    j["annotators"] = annotators;
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& [pair, score] : pair_scores) {
        nlohmann::ordered_json p;
        p["a"] = pair.first;
        p["b"] = pair.second;
        nlohmann::ordered_json labels;
        for (Tier1 l : kTier1Labels)
            labels[std::string(tag_name(l))] = score.per_label[static_cast<std::size_t>(l)];
        p["per_label"] = std::move(labels);
        p["overall"] = score.overall;
        p["shared_samples"] = score.shared_samples;
        pairs.push_back(std::move(p));
    }
    j["pairs"] = std::move(pairs);

    auto matrix_json = nlohmann::ordered_json::array();
    for (const auto& row : matrix) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& v : row) r.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
        matrix_json.push_back(std::move(r));
    }
    j["matrix"] = std::move(matrix_json);

    nlohmann::ordered_json samples = nlohmann::ordered_json::object();
    for (const auto& [id, pairs_for_sample] : per_sample) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& [pair, scores] : pairs_for_sample) {
            nlohmann::ordered_json p;
            p["a"] = pair.first;
            p["b"] = pair.second;
            for (Tier1 l : kTier1Labels)
                p[std::string(tag_name(l))] = scores[static_cast<std::size_t>(l)];
            arr.push_back(std::move(p));
        }
        samples[id] = std::move(arr);
    }
    j["per_sample"] = std::move(samples);
    return j;
}

std::string AgreementReport::matrix_csv() const {
    std::string out = "annotator";
    for (const auto& a : annotators) out += "," + a;
    out += '\n';
    for (std::size_t i = 0; i < annotators.size(); ++i) {
        out += annotators[i];
        for (const auto& v : matrix[i]) {
            out += ',';
            if (v) out += format_score(*v);
        }
        out += '\n';
    }
    return out;
}

AnnotationSets group_by_annotator(std::span<const AnnotatedSample> annotations) {
    AnnotationSets sets;
    for (const auto& s : annotations) {
        auto& corpus = sets[s.annotator_id];
        if (corpus.find(s.sample_id))
            throw DataError("annotator '" + s.annotator_id + "' has two records for sample '" +
                            s.sample_id + "'");
        corpus.samples.push_back(s);
    }
    return sets;
}

AgreementReport pairwise_agreement(const AnnotationSets& annotations) {
    AgreementReport report;
    for (const auto& [id, corpus] : annotations) report.annotators.push_back(id);
    const std::size_t n = report.annotators.size();

    std::vector<std::map<std::string, const AnnotatedSample*>> index(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& s : annotations.at(report.annotators[i]).samples)
            index[i][s.sample_id] = &s;

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const AnnotatorPair pair{report.annotators[i], report.annotators[j]};
            PairScore score;
            for (const auto& [sample_id, a] : index[i]) {
                auto hit = index[j].find(sample_id);
                if (hit == index[j].end()) continue;
                const AnnotatedSample* b = hit->second;
                if (a->text != b->text) throw TextMismatch(sample_id);

                LabelScores scores{};
                for (Tier1 l : kTier1Labels)
                    scores[static_cast<std::size_t>(l)] =
                        jaccard_iou(label_mask(*a, l), label_mask(*b, l));
                report.per_sample[sample_id][pair] = scores;
                for (std::size_t k = 0; k < 3; ++k) score.per_label[k] += scores[k];
                score.overall += mean(scores);
                ++score.shared_samples;
            }
            if (score.shared_samples == 0) continue;
            const auto denom = static_cast<double>(score.shared_samples);
            for (auto& v : score.per_label) v /= denom;
            score.overall /= denom;
            report.pair_scores.emplace(pair, score);
        }
    }
    if (report.pair_scores.empty())
        throw NoSharedSamples("no two annotators share a sample");

    report.matrix.assign(n, std::vector<std::optional<double>>(n));
    for (std::size_t i = 0; i < n; ++i) {
        report.matrix[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            auto it = report.pair_scores.find({report.annotators[i], report.annotators[j]});
            if (it == report.pair_scores.end()) continue;
            report.matrix[i][j] = it->second.overall;
            report.matrix[j][i] = it->second.overall;
        }
    }
    return report;
}

Corpus select_gold(const AnnotationSets& annotations, const AgreementReport& report,
                   double threshold, std::uint64_t seed) {
    std::map<std::string, std::vector<const AnnotatedSample*>> versions;
    for (const auto& [annotator, corpus] : annotations)
        for (const auto& s : corpus.samples) versions[s.sample_id].push_back(&s);

    Rng rng(seed);
    Corpus gold;
    gold.provenance = "gold(threshold>" + format_score(threshold) + ", seed=" +
                      std::to_string(seed) + ")";
    for (const auto& [sample_id, candidates] : versions) {
        const auto agreement = report.sample_agreement(sample_id);
        if (!agreement || !(*agreement > threshold)) continue;
        gold.samples.push_back(*candidates[rng.uniform_index(candidates.size())]);
    }
    return gold;
}

Corpus select_gold(const AnnotationSets& annotations, double threshold, std::uint64_t seed) {
    return select_gold(annotations, pairwise_agreement(annotations), threshold, seed);
}

}  // namespace slurg
