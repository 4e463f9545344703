#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opo {

enum class CorpusKind { legal, basic_moral, social_moral, professional_moral };

std::string to_string(CorpusKind k);
CorpusKind corpus_kind_from_string(const std::string& s);

// One externally stored value statement: a legal article or a moral principle.
struct Rule {
    std::string id;
    CorpusKind corpus_kind = CorpusKind::legal;
    std::optional<std::string> jurisdiction;  // "national" or a region; legal only
    std::string source_doc;
    std::optional<std::string> article_ref;
    std::string text;
    std::size_t char_len = 0;  // Unicode scalar values in text
};

enum class ScenarioLabel { expected, okay, unexpected };

std::string to_string(ScenarioLabel l);
ScenarioLabel scenario_label_from_string(const std::string& s);

// Structured situational record (location, role, behavior, ...) plus a
// normativity label.
struct ScenarioRecord {
    std::string id;
    std::map<std::string, std::string> scenario_fields;
    ScenarioLabel label = ScenarioLabel::okay;
};

struct CorpusStats {
    CorpusKind corpus_kind = CorpusKind::legal;
    std::size_t count = 0;
    double avg_char_len = 0.0;
};

}  // namespace opo
