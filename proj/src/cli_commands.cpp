#include "opo/cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "opo/corpus.hpp"
#include "opo/digest.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

namespace opo {

using nlohmann::json;

std::string RunConfig::artifact_header() const {
    return "seed=" + std::to_string(seed) + " config=" + config_digest;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    RunConfig cfg;
    try {
        cfg.seed = doc.value("seed", 0ULL);
        for (const auto& f : doc.value("corpus_files", json::array()))
            cfg.corpus_files.push_back(
                {f.at("path").get<std::string>(),
                 corpus_kind_from_string(f.at("kind").get<std::string>())});
        cfg.rules_out = doc.value("rules_out", cfg.rules_out);
        cfg.index_path = doc.value("index_path", cfg.index_path);
        if (doc.contains("gazetteer_path")) cfg.gazetteer_path = doc["gazetteer_path"];
        if (doc.contains("prompt_template_path"))
            cfg.prompt_template_path = doc["prompt_template_path"];

        if (doc.contains("embedding")) {
            const auto& e = doc["embedding"];
            cfg.embedding.provider = e.value("provider", cfg.embedding.provider);
            cfg.embedding.dim = e.value("dim", cfg.embedding.dim);
            cfg.embedding.seed_tag = e.value("seed_tag", cfg.embedding.seed_tag);
            if (e.contains("cache_path")) cfg.embedding.cache_path = e["cache_path"];
            cfg.embedding.http.host = e.value("host", cfg.embedding.http.host);
            cfg.embedding.http.port = e.value("port", cfg.embedding.http.port);
            cfg.embedding.http.path = e.value("path", cfg.embedding.http.path);
            cfg.embedding.http.dim = cfg.embedding.dim;
            cfg.embedding.http.max_retries = e.value("max_retries", cfg.embedding.http.max_retries);
        }
        if (doc.contains("chat")) {
            const auto& c = doc["chat"];
            cfg.chat.backend = c.value("backend", cfg.chat.backend);
            cfg.chat.mock_reply = c.value("mock_reply", cfg.chat.mock_reply);
            if (c.contains("record_cassette")) cfg.chat.record_cassette = c["record_cassette"];
            if (c.contains("replay_cassette")) cfg.chat.replay_cassette = c["replay_cassette"];
            cfg.chat.http.host = c.value("host", cfg.chat.http.host);
            cfg.chat.http.port = c.value("port", cfg.chat.http.port);
            cfg.chat.http.path = c.value("path", cfg.chat.http.path);
            cfg.chat.http.max_retries = c.value("max_retries", cfg.chat.http.max_retries);
            cfg.chat.http.max_in_flight = c.value("max_in_flight", cfg.chat.http.max_in_flight);
        }
        if (doc.contains("retrieval")) {
            const auto& r = doc["retrieval"];
            cfg.retrieval.k = r.value("k", cfg.retrieval.k);
            cfg.retrieval.max_context_chars =
                r.value("max_context_chars", cfg.retrieval.max_context_chars);
            if (r.contains("corpus_kind"))
                cfg.retrieval.corpus_kind = corpus_kind_from_string(r["corpus_kind"]);
        }
        if (doc.contains("qgen")) {
            const auto& q = doc["qgen"];
            cfg.qgen.qgen.neighbor_count = q.value("neighbor_count", cfg.qgen.qgen.neighbor_count);
            cfg.qgen.qgen.mode_type = q.value("mode_type", cfg.qgen.qgen.mode_type);
            cfg.qgen.qgen.element = q.value("element", cfg.qgen.qgen.element);
            if (q.contains("generation_template_path")) {
                std::ifstream t(q["generation_template_path"].get<std::string>());
                if (!t) throw ConfigError("cannot open generation template");
                cfg.qgen.qgen.generation_template.assign(std::istreambuf_iterator<char>(t), {});
            }
            if (q.contains("quality_template_path")) {
                std::ifstream t(q["quality_template_path"].get<std::string>());
                if (!t) throw ConfigError("cannot open quality template");
                cfg.qgen.qgen.quality_template.assign(std::istreambuf_iterator<char>(t), {});
            }
            cfg.qgen.seed_bank_path = q.value("seed_bank_path", cfg.qgen.seed_bank_path);
            cfg.qgen.anchors = q.value("anchors", cfg.qgen.anchors);
            cfg.qgen.questions_out = q.value("questions_out", cfg.qgen.questions_out);
            cfg.qgen.discard_log = q.value("discard_log", cfg.qgen.discard_log);
            cfg.qgen.review_out = q.value("review_out", cfg.qgen.review_out);
        }
        if (doc.contains("eval")) {
            const auto& e = doc["eval"];
            cfg.eval.dataset_path = e.value("dataset_path", cfg.eval.dataset_path);
            cfg.eval.model_id = e.value("model_id", cfg.eval.model_id);
            cfg.eval.report_table = e.value("report_table", cfg.eval.report_table);
            cfg.eval.report_json = e.value("report_json", cfg.eval.report_json);
            if (e.contains("modes")) {
                cfg.eval.modes.clear();
                for (const auto& m : e["modes"])
                    cfg.eval.modes.push_back(eval_mode_from_string(m.get<std::string>()));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config field: ") + e.what());
    }
    cfg.config_digest = sha256_hex(json::parse(raw).dump()).substr(0, 16);
    return cfg;
}

std::shared_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& cfg) {
    std::shared_ptr<EmbeddingProvider> inner;
    if (cfg.provider == "deterministic") {
        inner = std::make_shared<DeterministicProvider>(cfg.dim, cfg.seed_tag);
    } else if (cfg.provider == "http") {
        inner = std::make_shared<HttpEmbeddingProvider>(cfg.http);
    } else {
        throw ConfigError("unknown embedding provider: " + cfg.provider);
    }
    if (cfg.cache_path) {
        auto cache = std::make_shared<EmbeddingCache>(*cfg.cache_path);
        return std::make_shared<CachedProvider>(inner, cache);
    }
    return inner;
}

std::unique_ptr<ScriptedMockBackend> make_pipeline_mock() {
    return std::make_unique<ScriptedMockBackend>([](const ChatRequest& req) -> std::string {
        std::string prompt = req.joined_content();
        std::string tag = req.digest().substr(0, 8);
        if (prompt.rfind("You write", 0) == 0) {
            return "STEM: Which behavior complies with the stated principles? [" + tag + "]\n"
                   "A: An action that follows the principles.\n"
                   "B: An action that ignores them.\n"
                   "C: An action unrelated to them.\n"
                   "D: An action that contradicts them.\n"
                   "ANALYSIS: Option A restates the principles faithfully.\n"
                   "ANSWER: A";
        }
        if (prompt.rfind("You review", 0) == 0) {
            return "STEM_OK: yes\nOPTIONS_OK: yes\nANALYSIS_OK: yes\nANSWER_OK: yes\n"
                   "RATIONALE: Consistent with the rules.";
        }
        return std::string(1, static_cast<char>('A' + req.digest().back() % 4));
    });
}

std::shared_ptr<ChatBackend> make_chat_backend(const ChatConfig& cfg) {
    std::shared_ptr<ChatBackend> backend;
    if (cfg.backend == "mock") {
        backend = ScriptedMockBackend::constant(cfg.mock_reply);
    } else if (cfg.backend == "pipeline-mock") {
        backend = make_pipeline_mock();
    } else if (cfg.backend == "http") {
        backend = std::make_shared<HttpChatBackend>(cfg.http);
    } else if (cfg.backend == "replay") {
        if (!cfg.replay_cassette) throw ConfigError("replay backend requires replay_cassette");
        backend = std::make_shared<ReplayBackend>(*cfg.replay_cassette);
    } else {
        throw ConfigError("unknown chat backend: " + cfg.backend);
    }
    if (cfg.record_cassette)
        backend = std::make_shared<RecordingBackend>(backend, *cfg.record_cassette);
    return backend;
}

int cmd_ingest(const RunConfig& cfg) {
    if (cfg.corpus_files.empty()) throw ConfigError("no corpus_files configured");
    std::vector<Rule> all;
    for (const auto& f : cfg.corpus_files) {
        auto rules = ingest_rules(f.path, f.kind);
        all.insert(all.end(), rules.begin(), rules.end());
    }
    save_rules(all, cfg.rules_out, cfg.artifact_header());
    for (const auto& s : compute_stats(all))
        std::cout << to_string(s.corpus_kind) << "\tcount=" << s.count
                  << "\tavg_char_len=" << s.avg_char_len << '\n';
    return 0;
}

int cmd_build_index(const RunConfig& cfg) {
    auto rules = load_rules(cfg.rules_out);
    if (rules.empty()) throw DataError("no rules to index in " + cfg.rules_out);
    auto provider = make_embedding_provider(cfg.embedding);
    VectorIndex ix(provider->dim());
    for (const auto& r : rules) {
        std::string tag = r.corpus_kind == CorpusKind::legal ? r.jurisdiction.value_or("national")
                                                             : to_string(r.corpus_kind);
        ix.add(r.id, provider->embed(r.text), tag);
    }
    ix.seal();
    ix.save(cfg.index_path);
    std::cout << "indexed " << ix.size() << " rules into " << cfg.index_path << '\n';
    return 0;
}

int cmd_ask(const RunConfig& cfg, const std::string& question_text, bool base_mode) {
    auto rules = load_rules(cfg.rules_out);
    auto by_id = rules_by_id(rules);
    auto backend = make_chat_backend(cfg.chat);
    PromptTemplate tmpl = cfg.prompt_template_path ? PromptTemplate::load(*cfg.prompt_template_path)
                                                   : PromptTemplate::default_answer_template();

    MCQuestion q;  // free-form question rides the same prompt path with empty options
    q.id = "ask";
    q.stem = question_text;

    AssembledContext context;
    if (!base_mode) {
        auto provider = make_embedding_provider(cfg.embedding);
        VectorIndex ix = VectorIndex::load(cfg.index_path);
        std::set<std::string> locations;
        if (cfg.retrieval.corpus_kind == CorpusKind::legal && cfg.gazetteer_path) {
            Gazetteer gaz = Gazetteer::load(*cfg.gazetteer_path);
            locations = gaz.extract_locations(question_text);
        }
        auto partitions = select_partitions(locations, cfg.retrieval.corpus_kind);
        auto hits = ix.search(provider->embed(question_text), cfg.retrieval.k, partitions);
        context = assemble_context(hits, by_id, cfg.retrieval.max_context_chars);
        for (const auto& hit : hits)
            std::cout << "hit\t" << hit.rank << '\t' << hit.rule_id << '\t' << hit.score << '\n';
    }
    std::cout << "context_chars\t" << context.total_chars << '\n';
    for (const auto& [id, text] : context.included_rules) std::cout << "cited\t" << id << '\n';

    ChatRequest req;
    req.model_id = cfg.eval.model_id;
    req.messages = {{"user", render_prompt(tmpl, context, q)}};
    std::cout << "answer\t" << backend->complete(req).content << '\n';
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    auto dataset = load_dataset(cfg.eval.dataset_path);
    auto rules = load_rules(cfg.rules_out);
    auto by_id = rules_by_id(rules);
    auto backend = make_chat_backend(cfg.chat);

    EvalContext ctx;
    ctx.rules = &by_id;
    ctx.retrieval = cfg.retrieval;
    if (cfg.prompt_template_path) ctx.prompt = PromptTemplate::load(*cfg.prompt_template_path);

    std::optional<VectorIndex> ix;
    std::shared_ptr<EmbeddingProvider> provider;
    std::optional<Gazetteer> gaz;
    bool needs_index = false;
    for (auto m : cfg.eval.modes) needs_index |= m == EvalMode::OPO;
    if (needs_index) {
        ix = VectorIndex::load(cfg.index_path);
        provider = make_embedding_provider(cfg.embedding);
        ctx.index = &*ix;
        ctx.embedder = provider.get();
        if (cfg.gazetteer_path) {
            gaz = Gazetteer::load(*cfg.gazetteer_path);
            ctx.gazetteer = &*gaz;
        }
    }

    EvalReport report;
    EvalRow row;
    row.model_id = cfg.eval.model_id;
    row.dataset_tag = dataset.empty() ? "custom" : dataset.front().dataset_tag;
    double base = 0.0;
    for (auto mode : cfg.eval.modes) {
        auto res = run_eval(dataset, mode, *backend, ctx);
        row.warnings += res.warnings;
        switch (mode) {
            case EvalMode::Base: row.base_acc = base = res.accuracy; break;
            case EvalMode::OPO:
                row.opo_acc = res.accuracy;
                row.delta1 = res.accuracy - base;
                break;
            case EvalMode::Oracle:
                row.oracle_acc = res.accuracy;
                row.delta2 = res.accuracy - base;
                break;
        }
        report.records.insert(report.records.end(), res.records.begin(), res.records.end());
    }
    report.rows.push_back(row);
    emit_report(report, cfg.eval.report_table, cfg.eval.report_json, cfg.artifact_header());

    std::size_t errors = 0;
    for (const auto& rec : report.records) errors += rec.error.has_value();
    std::cout << "evaluated " << dataset.size() << " questions; per-question errors: " << errors
              << '\n';
    return errors == 0 ? 0 : 3;
}

int cmd_generate(const RunConfig& cfg) {
    auto rules = load_rules(cfg.rules_out);
    VectorIndex ix = VectorIndex::load(cfg.index_path);
    auto provider = make_embedding_provider(cfg.embedding);
    auto seed_bank = load_seed_bank(cfg.qgen.seed_bank_path);
    auto generator = make_chat_backend(cfg.chat);
    auto evaluator = make_chat_backend(cfg.chat);  // distinct session

    SplitMixRng rng(cfg.seed);
    auto result = run_generation(rules, ix, *provider, cfg.qgen.qgen, seed_bank, cfg.qgen.anchors,
                                 *generator, *evaluator, rng);
    save_dataset(result.accepted, cfg.qgen.questions_out, cfg.artifact_header());
    save_discard_log(result.discarded, cfg.qgen.discard_log);
    export_for_review(result.accepted, cfg.qgen.review_out);
    std::cout << "generated=" << cfg.qgen.anchors << " accepted=" << result.accepted.size()
              << " discarded=" << result.discarded.size() << '\n';
    return 0;
}

int cmd_report(const RunConfig& cfg, const std::string& report_json,
               const std::string& out_table) {
    EvalReport report = parse_report_json(report_json);
    emit_report(report, out_table, out_table + ".json", cfg.artifact_header());
    std::cout << "wrote " << out_table << '\n';
    return 0;
}

}  // namespace opo
