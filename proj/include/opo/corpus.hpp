#pragma once

#include <string>
#include <vector>

#include "opo/llmclient.hpp"
#include "opo/rule.hpp"

namespace opo {

// Loads one-record-per-line rule files. Moral corpora are paragraph-split
// (blank-line boundaries) into sub-numbered rules; legal rules are kept
// article-granular and never split.
std::vector<Rule> ingest_rules(const std::string& path, CorpusKind kind);

// Serializes rules back to the same line-delimited format.
void save_rules(const std::vector<Rule>& rules, const std::string& path,
                const std::string& header_comment = "");
std::vector<Rule> load_rules(const std::string& path);

std::vector<CorpusStats> compute_stats(const std::vector<Rule>& rules);

std::vector<ScenarioRecord> load_scenarios(const std::string& path);

// Two-stage scenario-to-rule pipeline: the scenario is first rewritten as a
// neutral declarative sentence, then explained against its label; the
// explanation becomes the social-moral rule text.
Rule derive_social_rule(const ScenarioRecord& record, ChatBackend& chat,
                        const std::string& source_doc = "scenario-bank");

std::vector<Rule> derive_social_rules(const std::vector<ScenarioRecord>& records,
                                      ChatBackend& chat,
                                      const std::string& source_doc = "scenario-bank");

}  // namespace opo
