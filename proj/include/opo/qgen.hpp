#pragma once

#include <cstdint>
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

// Fully worked exemplar used as an in-context demonstration.
struct SeedQuestion {
    std::string stem;
    std::array<std::string, 4> options;
    std::string analysis;
    std::vector<std::string> applied_rules;
    char answer = 'A';
    std::string action = "craft_scenario";  // or "focus_concept"

    std::string render() const;
};

std::vector<SeedQuestion> load_seed_bank(const std::string& path);

struct QGenConfig {
    std::size_t neighbor_count = 4;  // l
    std::string mode_type = "law";   // law | morality
    std::string element;             // location for law, organization for morality
    std::string generation_template;  // slots: {mode_type} {example} {input_principle} {element} {action} {action_type}
    std::string quality_template;     // slots: {rules} {question} {analysis} {answer}
};

std::string default_generation_template();
std::string default_quality_template();

struct GenerationContext {
    std::string anchor_rule_id;
    std::vector<std::string> rule_ids;  // anchor first, then neighbors in similarity order
    std::string combined_text;
};

// Seeded deterministic RNG used for all qgen sampling.
class SplitMixRng {
  public:
    explicit SplitMixRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    // Uniform draw in [0, n).
    std::size_t bounded(std::size_t n);

  private:
    std::uint64_t state_;
};

// Samples an anchor rule uniformly and enriches it with its top-l kNN
// neighbors (anchor excluded). A corpus smaller than l+1 uses whatever
// neighbors exist and sets `truncated`.
struct BuildContextResult {
    GenerationContext context;
    bool truncated = false;
};

BuildContextResult build_generation_context(const std::vector<Rule>& rules,
                                            const VectorIndex& index, EmbeddingProvider& embedder,
                                            std::size_t neighbor_count, SplitMixRng& rng);

struct CandidateParseError {
    std::string message;
    std::string raw_text;  // kept for audit
};

// Renders the generation prompt, calls the backend, and parses the fenced
// field-labeled response into a question candidate.
struct CandidateResult {
    std::optional<MCQuestion> question;
    std::optional<CandidateParseError> error;
    std::string rendered_prompt;
};

CandidateResult generate_candidate(const QGenConfig& config, const GenerationContext& context,
                                   const SeedQuestion& seed, ChatBackend& backend,
                                   const std::string& candidate_id);

struct QualityVerdict {
    bool stem_ok = false;
    bool options_ok = false;
    bool analysis_ok = false;
    bool answer_ok = false;
    std::string rationale;
    bool accepted() const { return stem_ok && options_ok && analysis_ok && answer_ok; }
};

// Second-model gate over the same rules used for generation. An
// unparseable verdict rejects the candidate.
QualityVerdict quality_gate(const MCQuestion& candidate, const GenerationContext& context,
                            const QGenConfig& config, ChatBackend& evaluator);

struct DiscardEntry {
    std::string candidate_id;
    std::string reason;  // failed criteria or verdict_parse_failure / candidate_parse_failure
};

struct PipelineResult {
    std::vector<MCQuestion> accepted;
    std::vector<DiscardEntry> discarded;
};

// Full generation pipeline over `anchors` draws; generator and evaluator
// are distinct backend instances.
PipelineResult run_generation(const std::vector<Rule>& rules, const VectorIndex& index,
                              EmbeddingProvider& embedder, const QGenConfig& config,
                              const std::vector<SeedQuestion>& seed_bank, std::size_t anchors,
                              ChatBackend& generator, ChatBackend& evaluator, SplitMixRng& rng);

void save_discard_log(const std::vector<DiscardEntry>& discarded, const std::string& path);

// Review export: stem/options/answer only (no analysis), with vote slots
// for three reviewers.
void export_for_review(const std::vector<MCQuestion>& accepted, const std::string& path);

// Applies the 2-of-3 rejection rule: a question with >= 2 "reject" votes
// is removed. Vote values: "keep", "reject", "" (abstain).
std::vector<MCQuestion> import_review(const std::vector<MCQuestion>& accepted,
                                      const std::string& review_path);

}  // namespace opo
