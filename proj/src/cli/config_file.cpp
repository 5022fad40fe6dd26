#include "config_file.hpp"

#include <algorithm>
#include <istream>

#include "qtnet/error.hpp"

namespace qtnet::cli {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

}  // namespace

std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& source) {
    std::vector<ConfigEntry> entries;
    std::string raw;
    std::string section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                throw ParseError(source + ": malformed section header '" + s + "'", line);
            }
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source + ": expected 'key = value', got '" + s + "'", line);
        }
        ConfigEntry e;
        e.section = section;
        e.key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (!value.empty() && value[0] != '"' && value[0] != '\'') {
            const auto hash = value.find(" #");
            if (hash != std::string::npos) value = trim(value.substr(0, hash));
        }
        e.value = unquote(value);
        e.line = line;
        if (e.key.empty()) throw ParseError(source + ": empty key", line);
        std::replace(e.key.begin(), e.key.end(), '_', '-');
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace qtnet::cli
