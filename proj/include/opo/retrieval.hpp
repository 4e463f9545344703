#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "opo/mcq.hpp"
#include "opo/rule.hpp"
#include "opo/vindex.hpp"

namespace opo {

struct RetrievalConfig {
    std::size_t k = 20;
    std::size_t max_context_chars = 1000;  // budget L, in Unicode scalars
    CorpusKind corpus_kind = CorpusKind::legal;
};

// Closed list of region names with alias spellings; drives legal routing.
class Gazetteer {
  public:
    void add(const std::string& canonical, const std::vector<std::string>& aliases = {});
    static Gazetteer load(const std::string& path);
    std::size_t size() const { return canonicals_.size(); }
    const std::vector<std::string>& regions() const { return canonicals_; }

    // Every region whose canonical name or alias occurs in the query.
    std::set<std::string> extract_locations(const std::string& query) const;

  private:
    std::vector<std::string> canonicals_;
    std::map<std::string, std::string> canon_by_pattern_;  // pattern -> canonical
};

// Legal queries search the national sub-database plus any regions named in
// the query; moral corpora have a single partition per kind.
std::set<std::string> select_partitions(const std::set<std::string>& locations, CorpusKind kind);

struct AssembledContext {
    std::vector<std::pair<std::string, std::string>> included_rules;  // (rule_id, text)
    std::size_t total_chars = 0;
};

// Greedy whole-rule packing in hit order with a one-character separator;
// never truncates a rule mid-text. total_chars <= budget always holds.
AssembledContext assemble_context(const std::vector<SearchHit>& hits,
                                  const std::map<std::string, Rule>& rules_by_id,
                                  std::size_t budget_chars);

struct PromptTemplate {
    std::string text;  // contains {rules} and {question} slots
    static PromptTemplate load(const std::string& path);
    static PromptTemplate default_answer_template();
};

// Deterministic slot substitution; an empty context renders the Base-mode
// prompt with an empty rules block.
std::string render_prompt(const PromptTemplate& tmpl, const AssembledContext& context,
                          const MCQuestion& question);

std::map<std::string, Rule> rules_by_id(const std::vector<Rule>& rules);

}  // namespace opo
