#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace opo {

// Number of Unicode scalar values in a UTF-8 string (continuation bytes
// are not counted). Invalid bytes count as one scalar each.
std::size_t codepoint_count(std::string_view s);

std::string trim(std::string_view s);

// Splits on runs of one or more blank lines. A line is blank when it
// contains only whitespace. Each returned paragraph is trimmed.
std::vector<std::string> split_paragraphs(std::string_view s);

}  // namespace opo
