#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 helpers. All span offsets in the toolkit count Unicode
// scalar values; malformed byte sequences decode to U+FFFD, one scalar per
// offending byte, so every byte string has a well-defined length.
namespace slurg::utf8 {

/// Decodes one scalar starting at `pos`; stores its byte width in `width`.
char32_t decode_at(std::string_view s, std::size_t pos, std::size_t& width) noexcept;

std::size_t length(std::string_view s) noexcept;

std::u32string decode(std::string_view s);

void append(std::string& out, char32_t cp);

std::string encode(std::u32string_view s);

/// Byte offset of every scalar boundary: result[i] is where scalar i starts,
/// result.back() == s.size().
std::vector<std::size_t> boundaries(std::string_view s);

/// Substring by scalar offsets [begin, end).
std::string substr(std::string_view s, std::size_t begin, std::size_t end);

}  // namespace slurg::utf8
