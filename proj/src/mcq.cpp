#include "opo/mcq.hpp"

#include <fstream>

#include "json.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

namespace opo {

using nlohmann::json;

std::string MCQuestion::render() const {
    std::string out = stem;
    for (std::size_t i = 0; i < options.size(); ++i) {
        out += '\n';
        out += kOptionLabels[i];
        out += ". ";
        out += options[i];
    }
    return out;
}

std::vector<MCQuestion> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::vector<MCQuestion> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("malformed question at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        try {
            MCQuestion q;
            q.id = rec.at("id").get<std::string>();
            q.stem = rec.at("stem").get<std::string>();
            auto opts = rec.at("options");
            if (!opts.is_array() || opts.size() != 4)
                throw DataError("question at line " + std::to_string(line_no) +
                                " must have exactly four options");
            for (std::size_t i = 0; i < 4; ++i) q.options[i] = opts[i].get<std::string>();
            std::string ans = rec.at("answer").get<std::string>();
            if (ans.size() != 1 || ans[0] < 'A' || ans[0] > 'D')
                throw DataError("question at line " + std::to_string(line_no) +
                                " has invalid answer label '" + ans + "'");
            q.answer = ans[0];
            if (rec.contains("analysis") && !rec["analysis"].is_null())
                q.analysis = rec["analysis"].get<std::string>();
            if (rec.contains("provenance_rule_ids"))
                q.provenance_rule_ids = rec["provenance_rule_ids"].get<std::vector<std::string>>();
            q.dataset_tag = rec.value("dataset_tag", "custom");
            q.language = rec.value("language", "en");
            out.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw DataError("malformed question at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
    return out;
}

void save_dataset(const std::vector<MCQuestion>& questions, const std::string& path,
                  const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    for (const auto& q : questions) {
        json rec{{"id", q.id},
                 {"stem", q.stem},
                 {"options", q.options},
                 {"answer", std::string(1, q.answer)},
                 {"dataset_tag", q.dataset_tag},
                 {"language", q.language}};
        if (q.analysis) rec["analysis"] = *q.analysis;
        if (!q.provenance_rule_ids.empty()) rec["provenance_rule_ids"] = q.provenance_rule_ids;
        out << rec.dump() << '\n';
    }
}

}  // namespace opo
