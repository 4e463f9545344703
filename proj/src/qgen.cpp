#include "opo/qgen.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

namespace opo {

using nlohmann::json;

std::string SeedQuestion::render() const {
    std::string out = "STEM: " + stem + "\n";
    for (std::size_t i = 0; i < options.size(); ++i)
        out += std::string(1, kOptionLabels[i]) + ": " + options[i] + "\n";
    out += "ANALYSIS: " + analysis + "\n";
    out += "ANSWER: " + std::string(1, answer);
    return out;
}

std::vector<SeedQuestion> load_seed_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open seed bank: " + path);
    std::vector<SeedQuestion> bank;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        try {
            json rec = json::parse(line);
            SeedQuestion s;
            s.stem = rec.at("stem").get<std::string>();
            auto opts = rec.at("options");
            if (opts.size() != 4)
                throw DataError("seed at line " + std::to_string(line_no) + " needs four options");
            for (std::size_t i = 0; i < 4; ++i) s.options[i] = opts[i].get<std::string>();
            s.analysis = rec.at("analysis").get<std::string>();
            s.applied_rules = rec.at("applied_rules").get<std::vector<std::string>>();
            if (s.applied_rules.empty())
                throw DataError("seed at line " + std::to_string(line_no) +
                                " needs non-empty applied_rules");
            std::string ans = rec.at("answer").get<std::string>();
            if (ans.size() != 1 || ans[0] < 'A' || ans[0] > 'D')
                throw DataError("seed at line " + std::to_string(line_no) + " has invalid answer");
            s.answer = ans[0];
            s.action = rec.value("action", "craft_scenario");
            bank.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw DataError("malformed seed at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (bank.empty()) throw DataError("seed bank is empty: " + path);
    return bank;
}

std::string default_generation_template() {
    return "You write {mode_type} multiple-choice questions.\n"
           "Requirements: ground the question in the given principles; craft exactly four "
           "options with a single correct answer; make distractors plausible; mention the "
           "{element} when natural; follow the action '{action}' ({action_type}); reason "
           "step by step before committing to the answer; output only the labeled fields.\n\n"
           "Example question:\n{example}\n\n"
           "Principles:\n{input_principle}\n\n"
           "Produce a new question in exactly this format:\n"
           "STEM: <stem>\nA: <option>\nB: <option>\nC: <option>\nD: <option>\n"
           "ANALYSIS: <step-by-step analysis>\nANSWER: <single letter>\n";
}

std::string default_quality_template() {
    return "You review a generated multiple-choice question against the rules it was "
           "generated from. Judge four criteria independently: the stem is clear and "
           "grounded in the rules; the four options are well formed with one correct "
           "answer; the analysis is sound and consistent with the rules; the marked "
           "answer is correct under the rules.\n\n"
           "Rules:\n{rules}\n\nQuestion:\n{question}\n\nAnalysis:\n{analysis}\n\n"
           "Marked answer: {answer}\n\n"
           "Reply in exactly this format:\n"
           "STEM_OK: <yes|no>\nOPTIONS_OK: <yes|no>\nANALYSIS_OK: <yes|no>\n"
           "ANSWER_OK: <yes|no>\nRATIONALE: <one sentence>\n";
}

std::uint64_t SplitMixRng::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t SplitMixRng::bounded(std::size_t n) {
    if (n == 0) throw DataError("bounded draw over empty range");
    // rejection sampling keeps the draw unbiased
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

BuildContextResult build_generation_context(const std::vector<Rule>& rules,
                                            const VectorIndex& index, EmbeddingProvider& embedder,
                                            std::size_t neighbor_count, SplitMixRng& rng) {
    if (rules.empty()) throw DataError("cannot sample from an empty corpus");
    if (neighbor_count == 0) throw ConfigError("neighbor_count must be >= 1");

    const Rule& anchor = rules[rng.bounded(rules.size())];
    EmbeddingVector qvec = embedder.embed(anchor.text);
    // +1 because the anchor matches itself in the index
    auto hits = index.search(qvec, neighbor_count + 1);

    BuildContextResult out;
    out.context.anchor_rule_id = anchor.id;
    out.context.rule_ids.push_back(anchor.id);
    out.context.combined_text = anchor.text;

    auto by_id = rules_by_id(rules);
    std::size_t taken = 0;
    for (const auto& hit : hits) {
        if (hit.rule_id == anchor.id) continue;
        if (taken == neighbor_count) break;
        out.context.rule_ids.push_back(hit.rule_id);
        out.context.combined_text += "\n" + by_id.at(hit.rule_id).text;
        ++taken;
    }
    out.truncated = taken < neighbor_count;
    return out;
}

namespace {

void replace_slot(std::string& text, const std::string& slot, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

// Parses "LABEL: value" with multi-line continuation until the next label.
std::map<std::string, std::string> parse_labeled_fields(const std::string& text,
                                                        const std::vector<std::string>& labels) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line, current_label;
    while (std::getline(in, line)) {
        bool matched = false;
        for (const auto& label : labels) {
            if (line.rfind(label + ":", 0) == 0) {
                current_label = label;
                out[label] = trim(line.substr(label.size() + 1));
                matched = true;
                break;
            }
        }
        if (!matched && !current_label.empty() && !trim(line).empty()) {
            out[current_label] += (out[current_label].empty() ? "" : "\n") + trim(line);
        }
    }
    return out;
}

}  // namespace

CandidateResult generate_candidate(const QGenConfig& config, const GenerationContext& context,
                                   const SeedQuestion& seed, ChatBackend& backend,
                                   const std::string& candidate_id) {
    std::string prompt =
        config.generation_template.empty() ? default_generation_template() : config.generation_template;
    replace_slot(prompt, "{mode_type}", config.mode_type);
    replace_slot(prompt, "{example}", seed.render());
    replace_slot(prompt, "{input_principle}", context.combined_text);
    replace_slot(prompt, "{element}", config.element);
    replace_slot(prompt, "{action}", seed.action);
    replace_slot(prompt, "{action_type}",
                 seed.action == "focus_concept" ? "focus the question on a single concept"
                                                : "craft a concrete scenario");

    CandidateResult result;
    result.rendered_prompt = prompt;

    ChatRequest req;
    req.model_id = "qgen";
    req.messages = {{"user", prompt}};
    std::string raw = backend.complete(req).content;

    auto fields = parse_labeled_fields(
        raw, {"STEM", "A", "B", "C", "D", "ANALYSIS", "ANSWER"});
    auto fail = [&](const std::string& msg) {
        result.error = CandidateParseError{msg, raw};
        return result;
    };
    for (const char* f : {"STEM", "A", "B", "C", "D", "ANSWER"})
        if (!fields.count(f) || fields[f].empty()) return fail(std::string("missing field ") + f);
    std::string ans = fields["ANSWER"];
    if (ans.size() != 1 || ans[0] < 'A' || ans[0] > 'D')
        return fail("invalid ANSWER label '" + ans + "'");

    MCQuestion q;
    q.id = candidate_id;
    q.stem = fields["STEM"];
    q.options = {fields["A"], fields["B"], fields["C"], fields["D"]};
    q.answer = ans[0];
    if (fields.count("ANALYSIS") && !fields["ANALYSIS"].empty()) q.analysis = fields["ANALYSIS"];
    q.provenance_rule_ids = context.rule_ids;
    q.dataset_tag = config.mode_type == "law" ? "A-Law" : "A-Professional-Morality";
    result.question = q;
    return result;
}

QualityVerdict quality_gate(const MCQuestion& candidate, const GenerationContext& context,
                            const QGenConfig& config, ChatBackend& evaluator) {
    std::string prompt =
        config.quality_template.empty() ? default_quality_template() : config.quality_template;
    replace_slot(prompt, "{rules}", context.combined_text);
    replace_slot(prompt, "{question}", candidate.render());
    replace_slot(prompt, "{analysis}", candidate.analysis.value_or(""));
    replace_slot(prompt, "{answer}", std::string(1, candidate.answer));

    ChatRequest req;
    req.model_id = "qgen-evaluator";
    req.messages = {{"user", prompt}};
    std::string raw = evaluator.complete(req).content;

    auto fields = parse_labeled_fields(
        raw, {"STEM_OK", "OPTIONS_OK", "ANALYSIS_OK", "ANSWER_OK", "RATIONALE"});
    QualityVerdict v;
    for (const char* f : {"STEM_OK", "OPTIONS_OK", "ANALYSIS_OK", "ANSWER_OK"}) {
        auto it = fields.find(f);
        if (it == fields.end() || (it->second != "yes" && it->second != "no")) {
            v = QualityVerdict{};
            v.rationale = "verdict_parse_failure";
            return v;
        }
    }
    v.stem_ok = fields["STEM_OK"] == "yes";
    v.options_ok = fields["OPTIONS_OK"] == "yes";
    v.analysis_ok = fields["ANALYSIS_OK"] == "yes";
    v.answer_ok = fields["ANSWER_OK"] == "yes";
    v.rationale = fields.count("RATIONALE") ? fields["RATIONALE"] : "";
    return v;
}

PipelineResult run_generation(const std::vector<Rule>& rules, const VectorIndex& index,
                              EmbeddingProvider& embedder, const QGenConfig& config,
                              const std::vector<SeedQuestion>& seed_bank, std::size_t anchors,
                              ChatBackend& generator, ChatBackend& evaluator, SplitMixRng& rng) {
    if (seed_bank.empty()) throw ConfigError("seed bank must be non-empty");
    PipelineResult result;
    for (std::size_t i = 0; i < anchors; ++i) {
        std::string candidate_id = "gen-" + std::to_string(i + 1);
        auto built = build_generation_context(rules, index, embedder, config.neighbor_count, rng);
        const SeedQuestion& seed = seed_bank[rng.bounded(seed_bank.size())];
        auto cand = generate_candidate(config, built.context, seed, generator, candidate_id);
        if (cand.error) {
            result.discarded.push_back(
                {candidate_id, "candidate_parse_failure: " + cand.error->message});
            continue;
        }
        auto verdict = quality_gate(*cand.question, built.context, config, evaluator);
        if (verdict.accepted()) {
            result.accepted.push_back(*cand.question);
        } else {
            std::string reason;
            if (verdict.rationale == "verdict_parse_failure") {
                reason = "verdict_parse_failure";
            } else {
                if (!verdict.stem_ok) reason += "stem ";
                if (!verdict.options_ok) reason += "options ";
                if (!verdict.analysis_ok) reason += "analysis ";
                if (!verdict.answer_ok) reason += "answer ";
                reason = "failed criteria: " + trim(reason);
            }
            result.discarded.push_back({candidate_id, reason});
        }
    }
    return result;
}

void save_discard_log(const std::vector<DiscardEntry>& discarded, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write discard log: " + path);
    for (const auto& d : discarded)
        out << json{{"candidate_id", d.candidate_id}, {"reason", d.reason}}.dump() << '\n';
}

void export_for_review(const std::vector<MCQuestion>& accepted, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write review file: " + path);
    for (const auto& q : accepted) {
        json rec{{"id", q.id},
                 {"stem", q.stem},
                 {"options", q.options},
                 {"answer", std::string(1, q.answer)},
                 {"votes", std::vector<std::string>{"", "", ""}}};
        out << rec.dump() << '\n';
    }
}

std::vector<MCQuestion> import_review(const std::vector<MCQuestion>& accepted,
                                      const std::string& review_path) {
    std::ifstream in(review_path);
    if (!in) throw DataError("cannot open review file: " + review_path);
    std::map<std::string, int> reject_votes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json rec = json::parse(line);
            int rejects = 0;
            for (const auto& v : rec.at("votes")) {
                std::string vote = v.get<std::string>();
                if (vote == "reject") ++rejects;
                else if (vote != "keep" && !vote.empty())
                    throw DataError("invalid vote '" + vote + "' at line " +
                                    std::to_string(line_no));
            }
            reject_votes[rec.at("id").get<std::string>()] = rejects;
        } catch (const json::exception& e) {
            throw DataError("malformed review record at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
    std::vector<MCQuestion> kept;
    for (const auto& q : accepted) {
        auto it = reject_votes.find(q.id);
        if (it != reject_votes.end() && it->second >= 2) continue;
        kept.push_back(q);
    }
    return kept;
}

}  // namespace opo
