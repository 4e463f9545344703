#include "opo/rule.hpp"

#include "opo/errors.hpp"

namespace opo {

std::string to_string(CorpusKind k) {
    switch (k) {
        case CorpusKind::legal: return "legal";
        case CorpusKind::basic_moral: return "basic_moral";
        case CorpusKind::social_moral: return "social_moral";
        case CorpusKind::professional_moral: return "professional_moral";
    }
    return "legal";
}

CorpusKind corpus_kind_from_string(const std::string& s) {
    if (s == "legal") return CorpusKind::legal;
    if (s == "basic_moral") return CorpusKind::basic_moral;
    if (s == "social_moral") return CorpusKind::social_moral;
    if (s == "professional_moral") return CorpusKind::professional_moral;
    throw DataError("unknown corpus_kind: " + s);
}

std::string to_string(ScenarioLabel l) {
    switch (l) {
        case ScenarioLabel::expected: return "expected";
        case ScenarioLabel::okay: return "okay";
        case ScenarioLabel::unexpected: return "unexpected";
    }
    return "okay";
}

ScenarioLabel scenario_label_from_string(const std::string& s) {
    if (s == "expected") return ScenarioLabel::expected;
    if (s == "okay") return ScenarioLabel::okay;
    if (s == "unexpected") return ScenarioLabel::unexpected;
    throw DataError("unknown scenario label: " + s);
}

}  // namespace opo
