#include "slurg/span_eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "slurg/errors.hpp"

namespace slurg {

namespace {

struct Interval {
    std::size_t start;
    std::size_t end;
};

using Key = std::tuple<std::size_t, std::size_t, Tier1>;

// Pairs gold with predictions and reports TP mass per label.
struct Tally {
    std::array<std::size_t, 3> n_gold{};
    std::array<std::size_t, 3> n_pred{};
    std::array<std::size_t, 3> strict_tp{};
    std::array<double, 3> relaxed_mass{};
    std::size_t drift = 0;
};

std::size_t idx(Tier1 l) { return static_cast<std::size_t>(l); }

std::size_t strict_matches(const std::vector<Span>& gold, const std::vector<Span>& pred,
                           Tier1 label) {
    std::map<std::pair<std::size_t, std::size_t>, std::ptrdiff_t> counts;
    for (const auto& s : gold)
        if (s.label.tier1 == label) ++counts[{s.start, s.end}];
    std::size_t tp = 0;
    for (const auto& s : pred) {
        if (s.label.tier1 != label) continue;
        auto it = counts.find({s.start, s.end});
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++tp;
        }
    }
    return tp;
}

double relaxed_mass(const std::vector<Span>& gold_all, const std::vector<Span>& pred_all,
                    Tier1 label) {
    std::vector<Interval> gold, pred;
    for (const auto& s : gold_all)
        if (s.label.tier1 == label) gold.push_back({s.start, s.end});
    for (const auto& s : pred_all)
        if (s.label.tier1 == label) pred.push_back({s.start, s.end});
    auto by_position = [](const Interval& a, const Interval& b) {
        return std::tie(a.start, a.end) < std::tie(b.start, b.end);
    };
    std::sort(gold.begin(), gold.end(), by_position);
    std::sort(pred.begin(), pred.end(), by_position);

    struct Candidate {
        double iou;
        std::size_t g;
        std::size_t p;
    };
    std::vector<Candidate> candidates;
    for (std::size_t g = 0; g < gold.size(); ++g)
        for (std::size_t p = 0; p < pred.size(); ++p) {
            const double iou = interval_iou(gold[g].start, gold[g].end, pred[p].start, pred[p].end);
            if (iou > 0.0) candidates.push_back({iou, g, p});
        }
    // Index order equals (start, end) order, so index ties resolve by start.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.g != b.g) return a.g < b.g;
        return a.p < b.p;
    });

    std::vector<bool> gold_used(gold.size()), pred_used(pred.size());
    double mass = 0.0;
    for (const auto& c : candidates) {
        if (gold_used[c.g] || pred_used[c.p]) continue;
        gold_used[c.g] = pred_used[c.p] = true;
        mass += c.iou;
    }
    return mass;
}

Tally tally(const Corpus& gold, const Corpus& pred) {
    std::map<std::string_view, const AnnotatedSample*> pred_index;
    for (const auto& s : pred.samples) {
        if (!pred_index.emplace(s.sample_id, &s).second)
            throw JoinFailure("prediction corpus repeats sample '" + s.sample_id + "'");
    }
    // Sums run in sample-id order so that input order cannot change a bit.
    std::map<std::string_view, const AnnotatedSample*> gold_index;
    for (const auto& g : gold.samples) {
        if (!gold_index.emplace(g.sample_id, &g).second)
            throw JoinFailure("gold corpus repeats sample '" + g.sample_id + "'");
    }
    std::map<std::string_view, bool> seen;
    Tally t;
    for (const auto& [id, gp] : gold_index) {
        const AnnotatedSample& g = *gp;
        auto it = pred_index.find(id);
        if (it == pred_index.end())
            throw JoinFailure("no prediction for gold sample '" + g.sample_id + "'");
        seen.emplace(id, true);
        const AnnotatedSample& p = *it->second;
        for (const auto& s : g.spans) ++t.n_gold[idx(s.label.tier1)];
        for (const auto& s : p.spans) ++t.n_pred[idx(s.label.tier1)];
        if (p.text != g.text) {
            ++t.drift;
            continue;
        }
        for (Tier1 l : kTier1Labels) {
            t.strict_tp[idx(l)] += strict_matches(g.spans, p.spans, l);
            t.relaxed_mass[idx(l)] += relaxed_mass(g.spans, p.spans, l);
        }
    }
    if (seen.size() != pred_index.size()) {
        for (const auto& [id, s] : pred_index)
            if (!seen.count(id))
                throw JoinFailure("prediction for unknown sample '" + std::string(id) + "'");
    }
    return t;
}

EvalReport build(const Tally& t, bool with_strict, bool with_relaxed) {
    EvalReport r;
    r.drift_count = t.drift;
    for (Tier1 l : kTier1Labels) {
        auto& b = r.per_label[idx(l)];
        b.n_gold = t.n_gold[idx(l)];
        b.n_pred = t.n_pred[idx(l)];
        b.strict_tp = t.strict_tp[idx(l)];
        b.relaxed_mass = t.relaxed_mass[idx(l)];
        if (with_strict) b.strict = make_prf(static_cast<double>(b.strict_tp), b.n_pred, b.n_gold);
        if (with_relaxed) b.relaxed = make_prf(b.relaxed_mass, b.n_pred, b.n_gold);
        r.n_gold_spans += b.n_gold;
        r.n_pred_spans += b.n_pred;
        r.strict_tp += b.strict_tp;
        r.relaxed_mass += b.relaxed_mass;
    }
    if (with_strict) r.strict = make_prf(static_cast<double>(r.strict_tp), r.n_pred_spans, r.n_gold_spans);
    if (with_relaxed) r.relaxed = make_prf(r.relaxed_mass, r.n_pred_spans, r.n_gold_spans);
    return r;
}

nlohmann::ordered_json prf_json(const Prf& p) {
    nlohmann::ordered_json j;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    j["f1"] = p.f1;
    return j;
}

}  // namespace

Prf make_prf(double tp_mass, std::size_t n_pred, std::size_t n_gold) {
    Prf p;
    p.precision = n_pred == 0 ? 0.0 : tp_mass / static_cast<double>(n_pred);
    p.recall = n_gold == 0 ? 0.0 : tp_mass / static_cast<double>(n_gold);
    const double denom = p.precision + p.recall;
    p.f1 = denom == 0.0 ? 0.0 : 2.0 * p.precision * p.recall / denom;
    return p;
}

double interval_iou(std::size_t a_start, std::size_t a_end, std::size_t b_start, std::size_t b_end) {
    const auto lo = std::max(a_start, b_start);
    const auto hi = std::min(a_end, b_end);
    if (lo >= hi) return 0.0;
    const auto inter = hi - lo;
    const auto uni = (a_end - a_start) + (b_end - b_start) - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport strict_f1(const Corpus& gold, const Corpus& pred) {
    return build(tally(gold, pred), true, false);
}

EvalReport relaxed_f1(const Corpus& gold, const Corpus& pred) {
    return build(tally(gold, pred), false, true);
}

EvalReport evaluate_split(const std::string& split_name, const Corpus& gold, const Corpus& pred) {
    auto r = build(tally(gold, pred), true, true);
    r.split_name = split_name;
    return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["split"] = split_name;
    j["strict"] = prf_json(strict);
    j["relaxed"] = prf_json(relaxed);
    nlohmann::ordered_json labels;
    for (Tier1 l : kTier1Labels) {
        const auto& b = per_label[idx(l)];
        nlohmann::ordered_json lj;
        lj["strict"] = prf_json(b.strict);
        lj["relaxed"] = prf_json(b.relaxed);
        lj["n_gold"] = b.n_gold;
        lj["n_pred"] = b.n_pred;
        labels[std::string(tag_name(l))] = std::move(lj);
    }
    j["per_label"] = std::move(labels);
    j["n_gold_spans"] = n_gold_spans;
    j["n_pred_spans"] = n_pred_spans;
    j["drift_count"] = drift_count;
    return j;
}

std::string f1_table_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "split,strict_f1,relaxed_f1\n";
    for (const auto& r : reports) os << r.split_name << ',' << r.strict.f1 << ',' << r.relaxed.f1 << '\n';
    return os.str();
}

}  // namespace slurg
