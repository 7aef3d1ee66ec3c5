#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "slurg/span_model.hpp"

namespace slurg {

/// Text with inline, possibly nested, tier-1 fallacy tags.
struct TaggedText {
    std::string value;

    friend bool operator==(const TaggedText&, const TaggedText&) = default;
};

enum class Strictness { Strict, Lenient };

enum class RepairKind {
    DroppedUnknownTag,
    ClosedDanglingTag,
    DroppedStrayClose,
    TruncatedCrossingTag,
    DroppedEmptySpan,
    DroppedDuplicateSpan,
    ReplacedInvalidByte,
};

std::string_view to_string(RepairKind kind) noexcept;

struct Repair {
    RepairKind kind;
    std::size_t position;  // character offset in the tagged input
    std::string tag;
};

struct ParseReport {
    AnnotatedSample sample;  // only text and spans are filled in
    std::vector<Repair> repairs;
    Strictness strictness = Strictness::Strict;
};

/// Strips tags and turns each tag pair into a span over the de-tagged text.
/// A tag token is `<name>` or `</name>` with `name` made of ASCII letters,
/// digits, `_` or `-` (trailing blanks before `>` allowed); anything else,
/// including a bare `<`, is ordinary text. In strict mode every malformation
/// throws MalformedMarkup; lenient mode repairs and records instead and never
/// throws.
ParseReport parse_tagged(std::string_view tagged, Strictness mode);

/// Inverse of a strict parse. Same-extent spans nest emotional outside
/// logical outside credibility. Tier-2 refinements are not part of the
/// markup and are dropped. Throws InvalidSample.
TaggedText render_tagged(const AnnotatedSample& sample);

/// Contents of every `<labeled_text>` block, looking inside
/// `<generated_samples>` wrappers when present. `<fallacy_analysis>` sections
/// are discarded first. One line break directly inside each block boundary
/// is dropped; any other whitespace is kept as text.
std::vector<TaggedText> extract_labeled_blocks(std::string_view raw_llm_output);

/// Total characters taken by recognised tag tokens in `tagged`.
std::size_t tag_characters(std::string_view tagged);

}  // namespace slurg
