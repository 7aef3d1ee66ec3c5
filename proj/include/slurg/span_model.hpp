#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace slurg {

enum class Tier1 { Credibility, Logical, Emotional };

inline constexpr std::array<Tier1, 3> kTier1Labels{Tier1::Credibility, Tier1::Logical,
                                                   Tier1::Emotional};

/// Fine-grained fallacies, grouped by their tier-1 category.
enum class Tier2 {
    // credibility
    AdHominem,
    AdPopulum,
    AppealToAuthority,
    AppealToNature,
    AppealToTradition,
    TuQuoque,
    // logic
    CausalOversimplification,
    CircularReasoning,
    Equivocation,
    FalseAnalogy,
    FalseCausality,
    FalseDilemma,
    HastyGeneralization,
    SlipperySlope,
    StrawMan,
    FallacyOfDivision,
    // emotion
    AppealToPositiveEmotion,
    AppealToFear,
    AppealToPity,
    AppealToAnger,
    AppealToRidicule,
    AppealToWorseProblem,
};

inline constexpr std::size_t kTier2Count = 22;

/// Tag name used on the wire: `credibility_fallacy`, `logical_fallacy`,
/// `emotional_fallacy`.
std::string_view tag_name(Tier1 label) noexcept;
std::optional<Tier1> tier1_from_tag(std::string_view tag) noexcept;

std::string_view tier2_name(Tier2 label) noexcept;
std::optional<Tier2> tier2_from_name(std::string_view name) noexcept;
Tier1 tier1_of(Tier2 label) noexcept;
std::vector<Tier2> tier2_members(Tier1 group);

/// Rank used when same-extent spans must be nested in markup; the lowest
/// rank is emitted outermost.
int nesting_rank(Tier1 label) noexcept;

struct FallacyLabel {
    Tier1 tier1 = Tier1::Logical;
    std::optional<Tier2> tier2;

    bool consistent() const noexcept { return !tier2 || tier1_of(*tier2) == tier1; }

    friend bool operator==(const FallacyLabel&, const FallacyLabel&) = default;
};

/// Half-open character range [start, end) over a sample's text, counted in
/// Unicode scalar values.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
    FallacyLabel label;

    std::size_t length() const noexcept { return end > start ? end - start : 0; }
    bool contains(const Span& other) const noexcept {
        return start <= other.start && other.end <= end;
    }

    friend bool operator==(const Span&, const Span&) = default;
};

/// Canonical span order: start ascending, end descending (containers before
/// their contents), then nesting rank, then tier-2.
bool canonical_less(const Span& a, const Span& b) noexcept;
void sort_canonical(std::vector<Span>& spans);

enum class Source { Reddit, Fourchan, Synthetic };

std::string_view to_string(Source source) noexcept;
std::optional<Source> source_from_string(std::string_view s) noexcept;

struct AnnotatedSample {
    std::string sample_id;
    std::string text;
    std::vector<Span> spans;
    std::string annotator_id;
    Source source = Source::Reddit;
    std::map<std::string, std::string> meta;

    std::size_t char_length() const noexcept;
    /// Sorts spans canonically so that equal span sets compare equal.
    void normalize();

    friend bool operator==(const AnnotatedSample&, const AnnotatedSample&) = default;
};

struct Corpus {
    std::vector<AnnotatedSample> samples;
    std::string provenance;

    bool empty() const noexcept { return samples.empty(); }
    std::size_t size() const noexcept { return samples.size(); }
    const AnnotatedSample* find(std::string_view sample_id) const noexcept;
    /// Empty when ids are unique, otherwise the first repeated id.
    std::optional<std::string> duplicate_id() const;
};

enum class ViolationKind { EmptySpan, OutOfBounds, CrossingOverlap, TierMismatch, DuplicateSpan };

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

ValidationResult validate_sample(const AnnotatedSample& sample);

// JSONL wire form.
nlohmann::ordered_json to_json(const Span& span);
nlohmann::ordered_json to_json(const AnnotatedSample& sample);
/// Throws DataError describing the first schema problem. `default_source`
/// fills in records that omit the field.
AnnotatedSample sample_from_json(const nlohmann::json& j,
                                 std::optional<Source> default_source = std::nullopt);

}  // namespace slurg
