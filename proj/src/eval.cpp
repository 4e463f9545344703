#include "opo/eval.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

namespace opo {

using nlohmann::json;

std::string to_string(EvalMode m) {
    switch (m) {
        case EvalMode::Base: return "Base";
        case EvalMode::OPO: return "OPO";
        case EvalMode::Oracle: return "Oracle";
    }
    return "Base";
}

EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "Base" || s == "base") return EvalMode::Base;
    if (s == "OPO" || s == "opo") return EvalMode::OPO;
    if (s == "Oracle" || s == "oracle") return EvalMode::Oracle;
    throw ConfigError("unknown eval mode: " + s);
}

char extract_answer(const std::string& raw) {
    std::string t = trim(raw);
    if (t.size() == 1 && t[0] >= 'A' && t[0] <= 'D') return t[0];

    static const std::regex marker(
        R"((?:[Aa]nswer\s+is\s*[:：]?|[Aa]nswer\s*[:：])\s*[\*\"'‘“]*\(?\s*([A-D])\b|\(\s*([A-D])\s*\))");
    std::smatch m;
    if (std::regex_search(t, m, marker)) return m[1].matched ? *m[1].first : *m[2].first;

    static const std::regex standalone(R"((?:^|[^A-Za-z])([A-D])(?:[^A-Za-z]|$))");
    if (std::regex_search(t, m, standalone)) return *m[1].first;
    return kUnparsed;
}

double round2(double x) {
    return std::floor(x * 100.0 + 0.5) / 100.0;
}

std::string format_delta(double delta) {
    double r = round2(std::abs(delta)) * (delta < 0 ? -1.0 : 1.0);
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    if (r > 0)
        out << "+" << r << "↑";
    else if (r < 0)
        out << r << "↓";
    else
        out << "0.00";
    return out.str();
}

namespace {

AssembledContext build_context(const MCQuestion& q, EvalMode mode, const EvalContext& ctx,
                               std::string* error) {
    if (mode == EvalMode::Base) return {};
    if (!ctx.rules) throw ConfigError("retrieval-backed modes require a rule corpus");

    if (mode == EvalMode::Oracle) {
        std::vector<SearchHit> hits;
        int rank = 1;
        for (const auto& rid : q.provenance_rule_ids) {
            if (!ctx.rules->count(rid)) {
                *error = "unresolvable provenance rule id: " + rid;
                return {};
            }
            hits.push_back(SearchHit{rid, 1.0, rank++});
        }
        if (hits.empty()) {
            *error = "question has no provenance rule ids";
            return {};
        }
        return assemble_context(hits, *ctx.rules, ctx.retrieval.max_context_chars);
    }

    // OPO: embed the question, route by jurisdiction, retrieve top-k.
    if (!ctx.index || !ctx.embedder) throw ConfigError("OPO mode requires an index and embedder");
    std::set<std::string> locations;
    if (ctx.retrieval.corpus_kind == CorpusKind::legal && ctx.gazetteer)
        locations = ctx.gazetteer->extract_locations(q.render());
    auto partitions = select_partitions(locations, ctx.retrieval.corpus_kind);
    EmbeddingVector qvec = ctx.embedder->embed(q.render());
    auto hits = ctx.index->search(qvec, ctx.retrieval.k, partitions);
    return assemble_context(hits, *ctx.rules, ctx.retrieval.max_context_chars);
}

}  // namespace

ModeResult run_eval(const std::vector<MCQuestion>& dataset, EvalMode mode, ChatBackend& backend,
                    const EvalContext& ctx) {
    if (mode == EvalMode::Oracle)
        for (const auto& q : dataset)
            if (q.provenance_rule_ids.empty())
                throw DataError("Oracle mode requires provenance_rule_ids on every question (" +
                                q.id + " has none)");

    ModeResult result;
    result.records.resize(dataset.size());

    const std::size_t workers =
        std::min<std::size_t>(std::max(1, backend.max_in_flight()), dataset.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < dataset.size(); i = next.fetch_add(1)) {
            const MCQuestion& q = dataset[i];
            QuestionRecord rec;
            rec.question_id = q.id;
            rec.mode = mode;
            std::string err;
            AssembledContext context = build_context(q, mode, ctx, &err);
            if (!err.empty()) {
                rec.error = err;
            } else {
                ChatRequest req;
                req.model_id = "eval";
                req.messages = {{"user", render_prompt(ctx.prompt, context, q)}};
                rec.raw_response = backend.complete(req).content;
                rec.extracted = extract_answer(rec.raw_response);
                rec.correct = rec.extracted == q.answer;
            }
            result.records[i] = std::move(rec);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::size_t correct = 0, scored = 0;
    for (const auto& rec : result.records) {
        if (rec.error) {
            ++result.warnings;
            continue;
        }
        ++scored;
        if (rec.correct) ++correct;
    }
    result.accuracy =
        scored == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(scored);
    return result;
}

namespace {

std::string fmt2(double x) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << round2(x);
    return out.str();
}

}  // namespace

void emit_report(const EvalReport& report, const std::string& table_path,
                 const std::string& json_path, const std::string& header_comment) {
    bool any_oracle = false;
    for (const auto& r : report.rows) any_oracle |= r.oracle_acc.has_value();

    std::ofstream table(table_path);
    if (!table) throw DataError("cannot write report table: " + table_path);
    if (!header_comment.empty()) table << "# " << header_comment << '\n';
    table << "model\tdataset\tBase\tOPO\tDelta1";
    if (any_oracle) table << "\tOracle\tDelta2";
    table << '\n';
    for (const auto& r : report.rows) {
        table << r.model_id << '\t' << r.dataset_tag << '\t' << fmt2(r.base_acc) << '\t'
              << (r.opo_acc ? fmt2(*r.opo_acc) : "-") << '\t'
              << (r.delta1 ? format_delta(*r.delta1) : "-");
        if (any_oracle)
            table << '\t' << (r.oracle_acc ? fmt2(*r.oracle_acc) : "-") << '\t'
                  << (r.delta2 ? format_delta(*r.delta2) : "-");
        table << '\n';
    }
    if (!table) throw DataError("write failure on report table: " + table_path);

    json jrows = json::array();
    for (const auto& r : report.rows) {
        json row{{"model_id", r.model_id},
                 {"dataset_tag", r.dataset_tag},
                 {"base_acc", round2(r.base_acc)},
                 {"warnings", r.warnings}};
        if (r.opo_acc) row["opo_acc"] = round2(*r.opo_acc);
        if (r.oracle_acc) row["oracle_acc"] = round2(*r.oracle_acc);
        if (r.delta1) {
            row["delta1"] = round2(*r.delta1);
            row["delta1_fmt"] = format_delta(*r.delta1);
        }
        if (r.delta2) {
            row["delta2"] = round2(*r.delta2);
            row["delta2_fmt"] = format_delta(*r.delta2);
        }
        jrows.push_back(row);
    }
    json jrecords = json::array();
    for (const auto& rec : report.records) {
        json jr{{"question_id", rec.question_id},
                {"mode", to_string(rec.mode)},
                {"raw_response", rec.raw_response},
                {"extracted", rec.extracted == kUnparsed ? "UNPARSED" : std::string(1, rec.extracted)},
                {"correct", rec.correct}};
        if (rec.error) jr["error"] = *rec.error;
        jrecords.push_back(jr);
    }
    json doc{{"rows", jrows}, {"records", jrecords}};
    if (!header_comment.empty()) doc["header"] = header_comment;
    std::ofstream jout(json_path);
    if (!jout) throw DataError("cannot write report json: " + json_path);
    jout << doc.dump(2) << '\n';
    if (!jout) throw DataError("write failure on report json: " + json_path);
}

EvalReport parse_report_json(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot open report json: " + json_path);
    json doc = json::parse(in);
    EvalReport report;
    for (const auto& row : doc.at("rows")) {
        EvalRow r;
        r.model_id = row.at("model_id").get<std::string>();
        r.dataset_tag = row.at("dataset_tag").get<std::string>();
        r.base_acc = row.at("base_acc").get<double>();
        r.warnings = row.value("warnings", 0u);
        if (row.contains("opo_acc")) r.opo_acc = row["opo_acc"].get<double>();
        if (row.contains("oracle_acc")) r.oracle_acc = row["oracle_acc"].get<double>();
        if (row.contains("delta1")) r.delta1 = row["delta1"].get<double>();
        if (row.contains("delta2")) r.delta2 = row["delta2"].get<double>();
        report.rows.push_back(r);
    }
    for (const auto& jr : doc.at("records")) {
        QuestionRecord rec;
        rec.question_id = jr.at("question_id").get<std::string>();
        rec.mode = eval_mode_from_string(jr.at("mode").get<std::string>());
        rec.raw_response = jr.at("raw_response").get<std::string>();
        std::string ex = jr.at("extracted").get<std::string>();
        rec.extracted = ex == "UNPARSED" ? kUnparsed : ex[0];
        rec.correct = jr.at("correct").get<bool>();
        if (jr.contains("error")) rec.error = jr["error"].get<std::string>();
        report.records.push_back(rec);
    }
    return report;
}

}  // namespace opo
