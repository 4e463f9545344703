#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opo/embedding.hpp"
#include "opo/eval.hpp"
#include "opo/llmclient.hpp"
#include "opo/qgen.hpp"
#include "opo/retrieval.hpp"
#include "opo/rule.hpp"

namespace opo {

struct CorpusFileConfig {
    std::string path;
    CorpusKind kind = CorpusKind::legal;
};

struct EmbeddingConfig {
    std::string provider = "deterministic";  // deterministic | http
    std::size_t dim = 64;
    std::string seed_tag = "default-v1";
    std::optional<std::string> cache_path;
    HttpEmbeddingConfig http;
};

struct ChatConfig {
    std::string backend = "mock";  // mock | pipeline-mock | http | replay
    std::string mock_reply = "A";
    std::optional<std::string> record_cassette;
    std::optional<std::string> replay_cassette;
    HttpBackendConfig http;
};

struct QGenRunConfig {
    QGenConfig qgen;
    std::string seed_bank_path;
    std::size_t anchors = 10;
    std::string questions_out = "generated_questions.jsonl";
    std::string discard_log = "discard_log.jsonl";
    std::string review_out = "review_export.jsonl";
};

struct EvalRunConfig {
    std::string dataset_path;
    std::vector<EvalMode> modes = {EvalMode::Base};
    std::string model_id = "model";
    std::string report_table = "report.tsv";
    std::string report_json = "report.json";
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::vector<CorpusFileConfig> corpus_files;
    std::string rules_out = "rules.jsonl";
    std::string index_path = "rules.idx";
    std::optional<std::string> gazetteer_path;
    std::optional<std::string> prompt_template_path;
    EmbeddingConfig embedding;
    ChatConfig chat;
    RetrievalConfig retrieval;
    QGenRunConfig qgen;
    EvalRunConfig eval;
    std::string config_digest;  // set on load; embedded in output headers

    std::string artifact_header() const;

    static RunConfig load(const std::string& path);
};

std::shared_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& cfg);
std::shared_ptr<ChatBackend> make_chat_backend(const ChatConfig& cfg);

// Deterministic offline backend driving the whole pipeline: recognizes
// generation and quality-gate prompts by their template preamble and
// answers everything else with a digest-derived option letter.
std::unique_ptr<ScriptedMockBackend> make_pipeline_mock();

int cmd_ingest(const RunConfig& cfg);
int cmd_build_index(const RunConfig& cfg);
int cmd_ask(const RunConfig& cfg, const std::string& question_text, bool base_mode);
int cmd_evaluate(const RunConfig& cfg);
int cmd_generate(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg, const std::string& report_json, const std::string& out_table);

}  // namespace opo
