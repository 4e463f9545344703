#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace opo {

inline constexpr std::array<char, 4> kOptionLabels = {'A', 'B', 'C', 'D'};

// Four-option single-answer question. provenance_rule_ids is present for
// auto-generated questions and enables Oracle-mode evaluation.
struct MCQuestion {
    std::string id;
    std::string stem;
    std::array<std::string, 4> options;  // A, B, C, D
    char answer = 'A';
    std::optional<std::string> analysis;
    std::vector<std::string> provenance_rule_ids;
    std::string dataset_tag = "custom";
    std::string language = "en";

    // Stem plus labeled options, as rendered into prompts.
    std::string render() const;
};

std::vector<MCQuestion> load_dataset(const std::string& path);
void save_dataset(const std::vector<MCQuestion>& questions, const std::string& path,
                  const std::string& header_comment = "");

}  // namespace opo
