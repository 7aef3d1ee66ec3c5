#include "slurg/tag_codec.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "slurg/errors.hpp"
#include "slurg/utf8.hpp"

namespace slurg {

namespace {

struct TagToken {
    std::string_view name;
    bool closing = false;
    std::size_t bytes = 0;  // full token width, ASCII only
};

bool is_name_char(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
}

std::optional<TagToken> match_tag(std::string_view s, std::size_t pos) noexcept {
    if (pos >= s.size() || s[pos] != '<') return std::nullopt;
    std::size_t i = pos + 1;
    TagToken tok;
    if (i < s.size() && s[i] == '/') {
        tok.closing = true;
        ++i;
    }
    const std::size_t name_begin = i;
    while (i < s.size() && is_name_char(s[i])) ++i;
    if (i == name_begin) return std::nullopt;
    tok.name = s.substr(name_begin, i - name_begin);
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size() || s[i] != '>') return std::nullopt;
    tok.bytes = i + 1 - pos;
    return tok;
}

struct OpenTag {
    Tier1 label;
    std::size_t start;    // offset in de-tagged text
    std::size_t tag_pos;  // offset in tagged input
};

struct PlacedSpan {
    Span span;
    std::size_t tag_pos;
};

class Parser {
public:
    Parser(std::string_view input, Strictness mode) : in_(input), mode_(mode) {}

    ParseReport run() {
        std::size_t pos = 0;
        while (pos < in_.size()) {
            if (auto tok = match_tag(in_, pos)) {
                handle(*tok);
                pos += tok->bytes;
                in_chars_ += tok->bytes;
                continue;
            }
            std::size_t w = 0;
            const char32_t cp = utf8::decode_at(in_, pos, w);
            if (cp == 0xFFFD && w == 1) {
                if (strict())
                    throw MalformedMarkup(in_chars_, MarkupErrorKind::InvalidEncoding, "invalid UTF-8 byte");
                repair(RepairKind::ReplacedInvalidByte, in_chars_, {});
                utf8::append(text_, cp);
            } else {
                text_.append(in_.substr(pos, w));
            }
            pos += w;
            ++in_chars_;
            ++out_chars_;
        }
        finish();
        return build();
    }

private:
    bool strict() const noexcept { return mode_ == Strictness::Strict; }

    void repair(RepairKind kind, std::size_t position, std::string_view tag) {
        repairs_.push_back({kind, position, std::string(tag)});
    }

    void emit(const OpenTag& open, std::size_t end) {
        if (open.start == end) {
            if (strict())
                throw MalformedMarkup(open.tag_pos, MarkupErrorKind::EmptySpan,
                                      std::string("<") + std::string(tag_name(open.label)) +
                                          "> encloses no text");
            repair(RepairKind::DroppedEmptySpan, open.tag_pos, tag_name(open.label));
            return;
        }
        spans_.push_back({Span{open.start, end, FallacyLabel{open.label, std::nullopt}}, open.tag_pos});
    }

    void handle(const TagToken& tok) {
        const auto label = tier1_from_tag(tok.name);
        if (!label) {
            if (strict())
                throw MalformedMarkup(in_chars_, MarkupErrorKind::UnknownTag,
                                      "unknown tag '" + std::string(tok.name) + "'");
            repair(RepairKind::DroppedUnknownTag, in_chars_, tok.name);
            return;
        }
        if (!tok.closing) {
            stack_.push_back({*label, out_chars_, in_chars_});
            return;
        }

        auto it = std::find_if(stack_.rbegin(), stack_.rend(),
                               [&](const OpenTag& o) { return o.label == *label; });
        if (it == stack_.rend()) {
            auto& pending = pending_stray_[static_cast<std::size_t>(*label)];
            if (pending > 0) {
                --pending;
                repair(RepairKind::DroppedStrayClose, in_chars_, tok.name);
                return;
            }
            if (strict())
                throw MalformedMarkup(in_chars_, MarkupErrorKind::UnbalancedClose,
                                      "closing tag '" + std::string(tok.name) +
                                          "' has no matching open tag");
            repair(RepairKind::DroppedStrayClose, in_chars_, tok.name);
            return;
        }

        const auto match_index = static_cast<std::size_t>(stack_.rend() - it) - 1;
        if (match_index + 1 != stack_.size()) {
            if (strict())
                throw MalformedMarkup(in_chars_, MarkupErrorKind::CrossingTags,
                                      "closing tag '" + std::string(tok.name) + "' crosses open '" +
                                          std::string(tag_name(stack_.back().label)) + "'");
            // Tags opened after the one being closed are cut short here.
            while (stack_.size() > match_index + 1) {
                const OpenTag inner = stack_.back();
                stack_.pop_back();
                repair(RepairKind::TruncatedCrossingTag, inner.tag_pos, tag_name(inner.label));
                ++pending_stray_[static_cast<std::size_t>(inner.label)];
                emit(inner, out_chars_);
            }
        }
        const OpenTag open = stack_.back();
        stack_.pop_back();
        emit(open, out_chars_);
    }

    void finish() {
        if (!stack_.empty() && strict()) {
            const auto& open = stack_.back();
            throw MalformedMarkup(open.tag_pos, MarkupErrorKind::UnclosedTag,
                                  "tag '" + std::string(tag_name(open.label)) + "' is never closed");
        }
        while (!stack_.empty()) {
            const OpenTag open = stack_.back();
            stack_.pop_back();
            repair(RepairKind::ClosedDanglingTag, open.tag_pos, tag_name(open.label));
            emit(open, out_chars_);
        }
    }

    ParseReport build() {
        std::stable_sort(spans_.begin(), spans_.end(), [](const PlacedSpan& a, const PlacedSpan& b) {
            return canonical_less(a.span, b.span);
        });
        ParseReport report;
        report.strictness = mode_;
        report.sample.text = std::move(text_);
        for (const auto& placed : spans_) {
            if (!report.sample.spans.empty() && report.sample.spans.back() == placed.span) {
                if (strict())
                    throw MalformedMarkup(placed.tag_pos, MarkupErrorKind::DuplicateSpan,
                                          "the same tag wraps the same text twice");
                repair(RepairKind::DroppedDuplicateSpan, placed.tag_pos,
                       tag_name(placed.span.label.tier1));
                continue;
            }
            report.sample.spans.push_back(placed.span);
        }
        report.repairs = std::move(repairs_);
        return report;
    }

    std::string_view in_;
    Strictness mode_;
    std::string text_;
    std::size_t in_chars_ = 0;
    std::size_t out_chars_ = 0;
    std::vector<OpenTag> stack_;
    std::vector<PlacedSpan> spans_;
    std::vector<Repair> repairs_;
    std::array<std::size_t, 3> pending_stray_{};
};

// Drops the line break that follows the opening tag and the one that
// precedes the closing tag; other whitespace belongs to the text.
void strip_block_newlines(std::string_view& s) {
    if (s.starts_with("\r\n"))
        s.remove_prefix(2);
    else if (s.starts_with("\n"))
        s.remove_prefix(1);
    if (s.ends_with("\r\n"))
        s.remove_suffix(2);
    else if (s.ends_with("\n"))
        s.remove_suffix(1);
}

std::string strip_blocks(std::string_view raw, std::string_view open, std::string_view close) {
    std::string out;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const auto b = raw.find(open, pos);
        if (b == std::string_view::npos) break;
        out.append(raw.substr(pos, b - pos));
        auto e = raw.find(close, b + open.size());
        if (e != std::string_view::npos) {
            pos = e + close.size();
            continue;
        }
        // Unterminated section: drop it up to the next output block.
        e = std::min(raw.find("<labeled_text>", b), raw.find("<generated_samples>", b));
        pos = e == std::string_view::npos ? raw.size() : e;
    }
    if (pos < raw.size()) out.append(raw.substr(pos));
    return out;
}

// Contents between `open` and `close`; a final unterminated block runs to
// the end of the input.
std::vector<std::string_view> blocks(std::string_view s, std::string_view open,
                                     std::string_view close) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto b = s.find(open, pos);
        if (b == std::string_view::npos) break;
        const auto content = b + open.size();
        const auto e = s.find(close, content);
        if (e == std::string_view::npos) {
            out.push_back(s.substr(content));
            break;
        }
        out.push_back(s.substr(content, e - content));
        pos = e + close.size();
    }
    return out;
}

}  // namespace

std::string_view to_string(RepairKind kind) noexcept {
    switch (kind) {
        case RepairKind::DroppedUnknownTag: return "dropped_unknown_tag";
        case RepairKind::ClosedDanglingTag: return "closed_dangling_tag";
        case RepairKind::DroppedStrayClose: return "dropped_stray_close";
        case RepairKind::TruncatedCrossingTag: return "truncated_crossing_tag";
        case RepairKind::DroppedEmptySpan: return "dropped_empty_span";
        case RepairKind::DroppedDuplicateSpan: return "dropped_duplicate_span";
        case RepairKind::ReplacedInvalidByte: return "replaced_invalid_byte";
    }
    return "";
}

ParseReport parse_tagged(std::string_view tagged, Strictness mode) {
    return Parser(tagged, mode).run();
}

TaggedText render_tagged(const AnnotatedSample& sample) {
    const auto validation = validate_sample(sample);
    if (!validation.ok()) throw InvalidSample(sample.sample_id + ": " + validation.summary());
    if (tag_characters(sample.text) != 0)
        throw InvalidSample(sample.sample_id + ": text contains a tag-like token");

    std::vector<Span> spans = sample.spans;
    sort_canonical(spans);
    spans.erase(std::unique(spans.begin(), spans.end(),
                            [](const Span& a, const Span& b) {
                                return a.start == b.start && a.end == b.end &&
                                       a.label.tier1 == b.label.tier1;
                            }),
                spans.end());

    const auto bounds = utf8::boundaries(sample.text);
    const std::size_t len = bounds.size() - 1;
    std::string out;
    out.reserve(sample.text.size() + spans.size() * 40);

    std::vector<const Span*> open;
    std::size_t next = 0;
    for (std::size_t p = 0; p <= len; ++p) {
        while (!open.empty() && open.back()->end == p) {
            out += "</";
            out += tag_name(open.back()->label.tier1);
            out += '>';
            open.pop_back();
        }
        while (next < spans.size() && spans[next].start == p) {
            out += '<';
            out += tag_name(spans[next].label.tier1);
            out += '>';
            open.push_back(&spans[next]);
            ++next;
        }
        if (p < len) out.append(sample.text, bounds[p], bounds[p + 1] - bounds[p]);
    }
    return TaggedText{std::move(out)};
}

std::vector<TaggedText> extract_labeled_blocks(std::string_view raw_llm_output) {
    const std::string cleaned =
        strip_blocks(raw_llm_output, "<fallacy_analysis>", "</fallacy_analysis>");
    const std::string_view view = cleaned;

    std::vector<std::string_view> regions;
    if (view.find("<generated_samples>") != std::string_view::npos)
        regions = blocks(view, "<generated_samples>", "</generated_samples>");
    else
        regions.push_back(view);

    std::vector<TaggedText> out;
    for (auto region : regions) {
        for (auto block : blocks(region, "<labeled_text>", "</labeled_text>")) {
            strip_block_newlines(block);
            out.push_back(TaggedText{std::string(block)});
        }
    }
    return out;
}

std::size_t tag_characters(std::string_view tagged) {
    std::size_t total = 0;
    for (std::size_t pos = 0; pos < tagged.size();) {
        if (auto tok = match_tag(tagged, pos)) {
            total += tok->bytes;
            pos += tok->bytes;
        } else {
            ++pos;
        }
    }
    return total;
}

}  // namespace slurg
