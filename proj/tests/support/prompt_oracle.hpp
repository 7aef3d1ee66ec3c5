#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "support/test_support.hpp"

namespace slurg::testing {

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string template_file(const std::string& name) { return slurp(fixture("templates/" + name + ".txt")); }

// Plain find-and-replace over a template file copy, kept apart from the library's filler.
inline std::string substitute(std::string text, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        const std::string slot = "{{" + key + "}}";
        const auto at = text.find(slot);
        if (at == std::string::npos) return "missing slot " + slot;
        text.replace(at, slot.size(), value);
    }
    return text;
}

}  // namespace slurg::testing
