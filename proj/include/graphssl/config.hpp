#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace graphssl {

// Flat `key = value` experiment config. '#' starts a comment; blank lines are
// ignored. Later keys override earlier ones.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& file);

}  // namespace graphssl
