#include "opo/text.hpp"

#include <cctype>
#include <sstream>

namespace opo {

std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_paragraphs(std::string_view s) {
    std::vector<std::string> out;
    std::string current;
    std::istringstream in{std::string(s)};
    std::string line;
    auto flush = [&] {
        std::string t = trim(current);
        if (!t.empty()) out.push_back(std::move(t));
        current.clear();
    };
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            flush();
        } else {
            if (!current.empty()) current += '\n';
            current += line;
        }
    }
    flush();
    return out;
}

}  // namespace opo
