#include "slurg/errors.hpp"

namespace slurg {

const char* to_string(MarkupErrorKind kind) noexcept {
    switch (kind) {
        case MarkupErrorKind::UnknownTag: return "unknown_tag";
        case MarkupErrorKind::UnbalancedClose: return "unbalanced_close";
        case MarkupErrorKind::UnclosedTag: return "unclosed_tag";
        case MarkupErrorKind::CrossingTags: return "crossing_tags";
        case MarkupErrorKind::EmptySpan: return "empty_span";
        case MarkupErrorKind::DuplicateSpan: return "duplicate_span";
        case MarkupErrorKind::InvalidEncoding: return "invalid_encoding";
    }
    return "unknown";
}

MalformedMarkup::MalformedMarkup(std::size_t position, MarkupErrorKind kind,
                                 const std::string& detail)
    : DataError(std::string("malformed markup (") + to_string(kind) + ") at character " +
                std::to_string(position) + ": " + detail),
      position_(position),
      kind_(kind) {}

}  // namespace slurg
