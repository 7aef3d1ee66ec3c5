#include "slurg/utf8.hpp"

namespace slurg::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_continuation(unsigned char c) noexcept { return (c & 0xC0) == 0x80; }

}  // namespace

char32_t decode_at(std::string_view s, std::size_t pos, std::size_t& width) noexcept {
    const auto lead = static_cast<unsigned char>(s[pos]);
    width = 1;
    if (lead < 0x80) return lead;

    std::size_t need = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((lead & 0xE0) == 0xC0) {
        need = 1; cp = lead & 0x1F; min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        need = 2; cp = lead & 0x0F; min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        need = 3; cp = lead & 0x07; min = 0x10000;
    } else {
        return kReplacement;
    }
    if (pos + need >= s.size()) return kReplacement;
    for (std::size_t i = 1; i <= need; ++i) {
        const auto c = static_cast<unsigned char>(s[pos + i]);
        if (!is_continuation(c)) return kReplacement;
        cp = (cp << 6) | (c & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacement;
    width = need + 1;
    return cp;
}

std::size_t length(std::string_view s) noexcept {
    std::size_t n = 0;
    for (std::size_t pos = 0, w = 0; pos < s.size(); pos += w, ++n) decode_at(s, pos, w);
    return n;
}

std::u32string decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t pos = 0, w = 0; pos < s.size(); pos += w) out.push_back(decode_at(s, pos, w));
    return out;
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) append(out, cp);
    return out;
}

std::vector<std::size_t> boundaries(std::string_view s) {
    std::vector<std::size_t> out;
    out.reserve(s.size() + 1);
    std::size_t pos = 0;
    for (std::size_t w = 0; pos < s.size(); pos += w) {
        out.push_back(pos);
        decode_at(s, pos, w);
    }
    out.push_back(s.size());
    return out;
}

std::string substr(std::string_view s, std::size_t begin, std::size_t end) {
    const auto b = boundaries(s);
    if (begin > end || end >= b.size()) return {};
    return std::string(s.substr(b[begin], b[end] - b[begin]));
}

}  // namespace slurg::utf8
