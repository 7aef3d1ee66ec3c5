#include "slurg/span_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "slurg/errors.hpp"
#include "slurg/utf8.hpp"

namespace slurg {

namespace {

constexpr std::array<std::string_view, kTier2Count> kTier2Names{
    "ad_hominem",
    "ad_populum",
    "appeal_to_authority",
    "appeal_to_nature",
    "appeal_to_tradition",
    "tu_quoque",
    "causal_oversimplification",
    "circular_reasoning",
    "equivocation",
    "false_analogy",
    "false_causality",
    "false_dilemma",
    "hasty_generalization",
    "slippery_slope",
    "straw_man",
    "fallacy_of_division",
    "appeal_to_positive_emotion",
    "appeal_to_fear",
    "appeal_to_pity",
    "appeal_to_anger",
    "appeal_to_ridicule",
    "appeal_to_worse_problem",
};

std::string describe(const Span& s) {
    std::ostringstream os;
    os << '(' << s.start << ',' << s.end << ',' << tag_name(s.label.tier1) << ')';
    return os.str();
}

}  // namespace

std::string_view tag_name(Tier1 label) noexcept {
    switch (label) {
        case Tier1::Credibility: return "credibility_fallacy";
        case Tier1::Logical: return "logical_fallacy";
        case Tier1::Emotional: return "emotional_fallacy";
    }
    return "";
}

std::optional<Tier1> tier1_from_tag(std::string_view tag) noexcept {
    for (Tier1 l : kTier1Labels)
        if (tag_name(l) == tag) return l;
    return std::nullopt;
}

std::string_view tier2_name(Tier2 label) noexcept {
    return kTier2Names[static_cast<std::size_t>(label)];
}

std::optional<Tier2> tier2_from_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kTier2Names.size(); ++i)
        if (kTier2Names[i] == name) return static_cast<Tier2>(i);
    return std::nullopt;
}

Tier1 tier1_of(Tier2 label) noexcept {
    const auto i = static_cast<int>(label);
    if (i <= static_cast<int>(Tier2::TuQuoque)) return Tier1::Credibility;
    if (i <= static_cast<int>(Tier2::FallacyOfDivision)) return Tier1::Logical;
    return Tier1::Emotional;
}

std::vector<Tier2> tier2_members(Tier1 group) {
    std::vector<Tier2> out;
    for (std::size_t i = 0; i < kTier2Count; ++i) {
        const auto t = static_cast<Tier2>(i);
        if (tier1_of(t) == group) out.push_back(t);
    }
    return out;
}

int nesting_rank(Tier1 label) noexcept {
    switch (label) {
        case Tier1::Emotional: return 0;
        case Tier1::Logical: return 1;
        case Tier1::Credibility: return 2;
    }
    return 3;
}

bool canonical_less(const Span& a, const Span& b) noexcept {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    const int ra = nesting_rank(a.label.tier1), rb = nesting_rank(b.label.tier1);
    if (ra != rb) return ra < rb;
    const int ta = a.label.tier2 ? static_cast<int>(*a.label.tier2) : -1;
    const int tb = b.label.tier2 ? static_cast<int>(*b.label.tier2) : -1;
    return ta < tb;
}

void sort_canonical(std::vector<Span>& spans) {
    std::sort(spans.begin(), spans.end(), canonical_less);
}

std::string_view to_string(Source source) noexcept {
    switch (source) {
        case Source::Reddit: return "reddit";
        case Source::Fourchan: return "fourchan";
        case Source::Synthetic: return "synthetic";
    }
    return "";
}

std::optional<Source> source_from_string(std::string_view s) noexcept {
    if (s == "reddit") return Source::Reddit;
    if (s == "fourchan" || s == "4chan") return Source::Fourchan;
    if (s == "synthetic") return Source::Synthetic;
    return std::nullopt;
}

std::size_t AnnotatedSample::char_length() const noexcept { return utf8::length(text); }

void AnnotatedSample::normalize() { sort_canonical(spans); }

const AnnotatedSample* Corpus::find(std::string_view sample_id) const noexcept {
    for (const auto& s : samples)
        if (s.sample_id == sample_id) return &s;
    return nullptr;
}

std::optional<std::string> Corpus::duplicate_id() const {
    std::set<std::string_view> seen;
    for (const auto& s : samples)
        if (!seen.insert(s.sample_id).second) return s.sample_id;
    return std::nullopt;
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::EmptySpan: return "empty_span";
        case ViolationKind::OutOfBounds: return "out_of_bounds";
        case ViolationKind::CrossingOverlap: return "crossing_overlap";
        case ViolationKind::TierMismatch: return "tier_mismatch";
        case ViolationKind::DuplicateSpan: return "duplicate_span";
    }
    return "";
}

std::string ValidationResult::summary() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.message;
    }
    return out;
}

ValidationResult validate_sample(const AnnotatedSample& sample) {
    ValidationResult result;
    auto report = [&](ViolationKind kind, std::string msg) {
        result.violations.push_back({kind, std::string(to_string(kind)) + ": " + std::move(msg)});
    };

    const std::size_t len = sample.char_length();
    std::vector<Span> spans = sample.spans;
    sort_canonical(spans);

    for (const auto& s : spans) {
        if (s.start >= s.end) report(ViolationKind::EmptySpan, describe(s) + " has start >= end");
        if (s.end > len)
            report(ViolationKind::OutOfBounds,
                   describe(s) + " end > text length " + std::to_string(len));
        if (!s.label.consistent())
            report(ViolationKind::TierMismatch,
                   describe(s) + " tier2 '" + std::string(tier2_name(*s.label.tier2)) +
                       "' does not belong to " + std::string(tag_name(s.label.tier1)));
    }

    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i] == spans[i - 1])
            report(ViolationKind::DuplicateSpan, describe(spans[i]) + " appears more than once");

    // Sorted by (start asc, end desc), any crossing pair shows up as a span
    // that outlives the innermost still-open span.
    std::vector<const Span*> open;
    for (const auto& s : spans) {
        if (s.start >= s.end) continue;
        while (!open.empty() && open.back()->end <= s.start) open.pop_back();
        if (!open.empty() && s.end > open.back()->end)
            report(ViolationKind::CrossingOverlap,
                   describe(*open.back()) + " and " + describe(s) +
                       " are neither disjoint nor nested");
        open.push_back(&s);
    }
    return result;
}

nlohmann::ordered_json to_json(const Span& span) {
    nlohmann::ordered_json j;
    j["start"] = span.start;
    j["end"] = span.end;
    j["label"] = tag_name(span.label.tier1);
    if (span.label.tier2)
        j["tier2"] = tier2_name(*span.label.tier2);
    else
        j["tier2"] = nullptr;
    return j;
}

nlohmann::ordered_json to_json(const AnnotatedSample& sample) {
    nlohmann::ordered_json j;
    j["sample_id"] = sample.sample_id;
    j["annotator_id"] = sample.annotator_id;
    j["source"] = to_string(sample.source);
    j["text"] = sample.text;
    auto spans = nlohmann::ordered_json::array();
    for (const auto& s : sample.spans) spans.push_back(to_json(s));
    j["spans"] = std::move(spans);
    auto meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : sample.meta) meta[k] = v;
    j["meta"] = std::move(meta);
    return j;
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const nlohmann::json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw DataError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::size_t require_offset(const nlohmann::json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number_integer()) throw DataError(std::string("span '") + key + "' must be an integer");
    if (v.get<long long>() < 0) throw DataError(std::string("span '") + key + "' is negative");
    return v.get<std::size_t>();
}

}  // namespace

AnnotatedSample sample_from_json(const nlohmann::json& j, std::optional<Source> default_source) {
    if (!j.is_object()) throw DataError("record is not a JSON object");
    AnnotatedSample s;
    s.sample_id = require_string(j, "sample_id");
    if (s.sample_id.empty()) throw DataError("empty sample_id");
    s.text = require_string(j, "text");
    if (j.contains("annotator_id") && !j["annotator_id"].is_null())
        s.annotator_id = require_string(j, "annotator_id");

    if (j.contains("source") && !j["source"].is_null()) {
        const auto raw = require_string(j, "source");
        auto src = source_from_string(raw);
        if (!src) throw DataError("unknown source '" + raw + "'");
        s.source = *src;
    } else if (default_source) {
        s.source = *default_source;
    } else {
        throw DataError("missing field 'source'");
    }

    if (j.contains("spans") && !j["spans"].is_null()) {
        const auto& arr = j["spans"];
        if (!arr.is_array()) throw DataError("field 'spans' must be an array");
        for (const auto& js : arr) {
            if (!js.is_object()) throw DataError("span is not an object");
            Span span;
            span.start = require_offset(js, "start");
            span.end = require_offset(js, "end");
            const auto label = require_string(js, "label");
            auto t1 = tier1_from_tag(label);
            if (!t1) throw DataError("unknown label '" + label + "'");
            span.label.tier1 = *t1;
            if (js.contains("tier2") && !js["tier2"].is_null()) {
                const auto name = require_string(js, "tier2");
                auto t2 = tier2_from_name(name);
                if (!t2) throw DataError("unknown tier2 '" + name + "'");
                span.label.tier2 = *t2;
            }
            s.spans.push_back(span);
        }
    }

    if (j.contains("meta") && !j["meta"].is_null()) {
        const auto& meta = j["meta"];
        if (!meta.is_object()) throw DataError("field 'meta' must be an object");
        for (const auto& [k, v] : meta.items())
            s.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    s.normalize();
    return s;
}

}  // namespace slurg
