#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qtnet::cli {

// `key = value` lines, optional `[section]` headers, '#' or ';' comments.
// Keys use the long flag name without dashes; dashes and underscores are
// interchangeable.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};

std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& source);

}  // namespace qtnet::cli
