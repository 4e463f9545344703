#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opo/llmclient.hpp"
#include "opo/mcq.hpp"
#include "opo/retrieval.hpp"
#include "opo/rule.hpp"
#include "opo/vindex.hpp"

namespace opo {

enum class EvalMode { Base, OPO, Oracle };

std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

inline constexpr char kUnparsed = '?';

// Deterministic extraction cascade:
//   1. the trimmed response is a single option label;
//   2. first label adjacent to an answer marker ("answer is", "(X)");
//   3. first standalone capital A-D token;
// otherwise UNPARSED ('?'), which scores as incorrect.
char extract_answer(const std::string& raw);

struct QuestionRecord {
    std::string question_id;
    EvalMode mode = EvalMode::Base;
    std::string raw_response;
    char extracted = kUnparsed;
    bool correct = false;
    std::optional<std::string> error;  // e.g. unresolvable provenance id
};

struct EvalRow {
    std::string model_id;
    std::string dataset_tag;
    double base_acc = 0.0;
    std::optional<double> opo_acc;
    std::optional<double> oracle_acc;
    std::optional<double> delta1;  // opo - base, from unrounded accuracies
    std::optional<double> delta2;  // oracle - base
    std::size_t warnings = 0;      // questions excluded from Oracle accuracy
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::vector<QuestionRecord> records;
};

struct EvalContext {
    const VectorIndex* index = nullptr;        // required for OPO
    const std::map<std::string, Rule>* rules = nullptr;  // required for OPO/Oracle
    const Gazetteer* gazetteer = nullptr;      // legal routing; optional
    EmbeddingProvider* embedder = nullptr;     // required for OPO
    RetrievalConfig retrieval;
    PromptTemplate prompt = PromptTemplate::default_answer_template();
};

struct ModeResult {
    double accuracy = 0.0;  // percentage over the full dataset, unrounded
    std::size_t warnings = 0;
    std::vector<QuestionRecord> records;
};

ModeResult run_eval(const std::vector<MCQuestion>& dataset, EvalMode mode, ChatBackend& backend,
                    const EvalContext& ctx);

// Half-up rounding to 2 decimals; matches the printed accuracy format.
double round2(double x);

// Delta column rendering: "+5.04↑" / "-1.20↓" / "0.00".
std::string format_delta(double delta);

// Plain-text table plus a JSON mirror with identical numbers.
void emit_report(const EvalReport& report, const std::string& table_path,
                 const std::string& json_path, const std::string& header_comment = "");
EvalReport parse_report_json(const std::string& json_path);

}  // namespace opo
