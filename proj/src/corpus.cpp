#include "opo/corpus.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "json.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

namespace opo {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownFields = {"id",          "corpus_kind", "jurisdiction",
                                            "source_doc",  "article_ref", "text"};

Rule parse_record(const json& rec, CorpusKind kind, std::size_t line_no) {
    for (auto it = rec.begin(); it != rec.end(); ++it) {
        if (!kKnownFields.count(it.key()))
            std::cerr << "warning: line " << line_no << ": ignoring unknown field '" << it.key()
                      << "'\n";
    }
    Rule r;
    r.corpus_kind = kind;
    try {
        r.id = rec.at("id").get<std::string>();
        r.text = trim(rec.at("text").get<std::string>());
        r.source_doc = rec.value("source_doc", "");
        if (rec.contains("jurisdiction") && !rec["jurisdiction"].is_null())
            r.jurisdiction = rec["jurisdiction"].get<std::string>();
        if (rec.contains("article_ref") && !rec["article_ref"].is_null())
            r.article_ref = rec["article_ref"].get<std::string>();
    } catch (const json::exception& e) {
        throw DataError("malformed record at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r.id.empty()) throw DataError("empty id at line " + std::to_string(line_no));
    if (r.text.empty()) throw DataError("empty text at line " + std::to_string(line_no));
    if (kind == CorpusKind::legal && !r.jurisdiction)
        throw DataError("legal rule without jurisdiction at line " + std::to_string(line_no));
    r.char_len = codepoint_count(r.text);
    return r;
}

}  // namespace

std::vector<Rule> ingest_rules(const std::string& path, CorpusKind kind) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open rules file: " + path);

    std::vector<Rule> rules;
    std::map<std::string, std::size_t> seen;  // id -> line number
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("malformed record at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        Rule base = parse_record(rec, kind, line_no);

        auto record_id = [&](const Rule& r) {
            auto [it, inserted] = seen.emplace(r.id, line_no);
            if (!inserted)
                throw DataError("duplicate id '" + r.id + "' at lines " +
                                std::to_string(it->second) + " and " + std::to_string(line_no));
        };

        if (kind == CorpusKind::legal) {
            record_id(base);
            rules.push_back(std::move(base));
            continue;
        }
        auto paragraphs = split_paragraphs(base.text);
        if (paragraphs.size() <= 1) {
            record_id(base);
            rules.push_back(std::move(base));
        } else {
            for (std::size_t i = 0; i < paragraphs.size(); ++i) {
                Rule part = base;
                part.id = base.id + "-" + std::to_string(i + 1);
                part.text = paragraphs[i];
                part.char_len = codepoint_count(part.text);
                record_id(part);
                rules.push_back(std::move(part));
            }
        }
    }
    return rules;
}

void save_rules(const std::vector<Rule>& rules, const std::string& path,
                const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write rules file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    for (const auto& r : rules) {
        json rec{{"id", r.id},
                 {"corpus_kind", to_string(r.corpus_kind)},
                 {"source_doc", r.source_doc},
                 {"text", r.text}};
        if (r.jurisdiction) rec["jurisdiction"] = *r.jurisdiction;
        if (r.article_ref) rec["article_ref"] = *r.article_ref;
        out << rec.dump() << '\n';
    }
}

std::vector<Rule> load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open rules file: " + path);
    std::vector<Rule> rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("malformed record at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        CorpusKind kind = corpus_kind_from_string(rec.at("corpus_kind").get<std::string>());
        rules.push_back(parse_record(rec, kind, line_no));
    }
    return rules;
}

std::vector<CorpusStats> compute_stats(const std::vector<Rule>& rules) {
    std::map<CorpusKind, std::pair<std::size_t, std::size_t>> acc;  // kind -> (count, chars)
    for (const auto& r : rules) {
        auto& [count, chars] = acc[r.corpus_kind];
        ++count;
        chars += r.char_len;
    }
    std::vector<CorpusStats> out;
    for (const auto& [kind, cc] : acc) {
        CorpusStats s;
        s.corpus_kind = kind;
        s.count = cc.first;
        s.avg_char_len = cc.first == 0 ? 0.0
                                       : static_cast<double>(cc.second) /
                                             static_cast<double>(cc.first);
        out.push_back(s);
    }
    return out;
}

std::vector<ScenarioRecord> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scenarios file: " + path);
    std::vector<ScenarioRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        try {
            json rec = json::parse(line);
            ScenarioRecord s;
            s.id = rec.at("id").get<std::string>();
            s.label = scenario_label_from_string(rec.at("label").get<std::string>());
            for (auto it = rec.at("scenario_fields").begin(); it != rec.at("scenario_fields").end();
                 ++it)
                s.scenario_fields[it.key()] = it.value().get<std::string>();
            if (s.scenario_fields.empty())
                throw DataError("empty scenario_fields at line " + std::to_string(line_no));
            records.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw DataError("malformed scenario at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
    return records;
}

namespace {

std::string scenario_sentence_prompt(const ScenarioRecord& record) {
    std::string fields;
    for (const auto& [k, v] : record.scenario_fields) fields += k + ": " + v + "\n";
    return "Rewrite the following structured scenario as one neutral declarative sentence.\n" +
           fields;
}

std::string explanation_prompt(const std::string& sentence, ScenarioLabel label) {
    return "Scenario: " + sentence + "\nThe behavior in this scenario is considered '" +
           to_string(label) +
           "'. Explain why the behavior aligns with this label, as a general moral rule.";
}

std::string run_stage(ChatBackend& chat, const std::string& stage, const std::string& prompt) {
    ChatRequest req;
    req.model_id = "rule-derivation";
    req.messages = {{"user", prompt}};
    try {
        return chat.complete(req).content;
    } catch (const std::exception& e) {
        throw ProviderError("scenario pipeline failed at stage=" + stage + ": " + e.what());
    }
}

}  // namespace

Rule derive_social_rule(const ScenarioRecord& record, ChatBackend& chat,
                        const std::string& source_doc) {
    std::string sentence = run_stage(chat, "sentence", scenario_sentence_prompt(record));
    std::string explanation =
        run_stage(chat, "explanation", explanation_prompt(sentence, record.label));
    Rule r;
    r.id = record.id;
    r.corpus_kind = CorpusKind::social_moral;
    r.source_doc = source_doc;
    r.text = trim(explanation);
    if (r.text.empty()) throw ProviderError("scenario pipeline failed at stage=explanation: empty");
    r.char_len = codepoint_count(r.text);
    return r;
}

std::vector<Rule> derive_social_rules(const std::vector<ScenarioRecord>& records,
                                      ChatBackend& chat, const std::string& source_doc) {
    std::vector<Rule> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(derive_social_rule(rec, chat, source_doc));
    return out;
}

}  // namespace opo
