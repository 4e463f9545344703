#include "opo/retrieval.hpp"

#include <fstream>

#include "json.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

namespace opo {

using nlohmann::json;

void Gazetteer::add(const std::string& canonical, const std::vector<std::string>& aliases) {
    if (canon_by_pattern_.count(canonical))
        throw DataError("duplicate gazetteer entry: " + canonical);
    canonicals_.push_back(canonical);
    canon_by_pattern_[canonical] = canonical;
    for (const auto& a : aliases) canon_by_pattern_[a] = canonical;
}

Gazetteer Gazetteer::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gazetteer file: " + path);
    Gazetteer gaz;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        try {
            json rec = json::parse(line);
            gaz.add(rec.at("canonical_name").get<std::string>(),
                    rec.value("aliases", std::vector<std::string>{}));
        } catch (const json::exception& e) {
            throw DataError("malformed gazetteer entry at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
    return gaz;
}

std::set<std::string> Gazetteer::extract_locations(const std::string& query) const {
    std::set<std::string> out;
    for (const auto& [pattern, canonical] : canon_by_pattern_)
        if (query.find(pattern) != std::string::npos) out.insert(canonical);
    return out;
}

std::set<std::string> select_partitions(const std::set<std::string>& locations, CorpusKind kind) {
    if (kind == CorpusKind::legal) {
        std::set<std::string> parts = locations;
        parts.insert("national");
        return parts;
    }
    return {to_string(kind)};
}

AssembledContext assemble_context(const std::vector<SearchHit>& hits,
                                  const std::map<std::string, Rule>& by_id,
                                  std::size_t budget_chars) {
    AssembledContext ctx;
    for (const auto& hit : hits) {
        auto it = by_id.find(hit.rule_id);
        if (it == by_id.end()) throw DataError("hit references unknown rule: " + hit.rule_id);
        std::size_t len = it->second.char_len;
        std::size_t sep = ctx.included_rules.empty() ? 0 : 1;
        if (ctx.total_chars + sep + len > budget_chars) break;
        ctx.total_chars += sep + len;
        ctx.included_rules.emplace_back(hit.rule_id, it->second.text);
    }
    return ctx;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open prompt template: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.find("{rules}") == std::string::npos || text.find("{question}") == std::string::npos)
        throw DataError("prompt template must contain {rules} and {question} slots: " + path);
    return PromptTemplate{std::move(text)};
}

PromptTemplate PromptTemplate::default_answer_template() {
    return PromptTemplate{
        "Please answer the following multiple-choice question. Respond with the single letter of "
        "the correct option.\n\nRelevant rules:\n{rules}\n\nQuestion:\n{question}\n\nAnswer:"};
}

namespace {

void replace_slot(std::string& text, const std::string& slot, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

}  // namespace

std::string render_prompt(const PromptTemplate& tmpl, const AssembledContext& context,
                          const MCQuestion& question) {
    std::string rules_block;
    for (const auto& [id, text] : context.included_rules) {
        if (!rules_block.empty()) rules_block += '\n';
        rules_block += text;
    }
    std::string out = tmpl.text;
    replace_slot(out, "{rules}", rules_block);
    replace_slot(out, "{question}", question.render());
    return out;
}

std::map<std::string, Rule> rules_by_id(const std::vector<Rule>& rules) {
    std::map<std::string, Rule> out;
    for (const auto& r : rules) out[r.id] = r;
    return out;
}

}  // namespace opo
