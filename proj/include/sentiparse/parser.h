#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sentiparse/grammar.h"
#include "sentiparse/label.h"

namespace sentiparse {

// local model score per rule application; all zeros when no weights are
// trained (glue, OOV, auxiliary and start applications always score 0)
struct RuleScores {
  std::vector<double> dict;
  std::vector<double> comb;

  static RuleScores zeros(const Grammar& g);
};

enum class RuleKind : uint8_t { Aux = 0, Comb = 1, Dict = 2, Glue = 3, Oov = 4, Start = 5 };

struct ChartItem {
  int i = 0, j = 0;
  NonTerminal sym = NonTerminal::N;
  PolarityDist dist;        // not meaningful for E items
  double score = 0.0;
  int32_t n_rules = 0;      // rule applications in the subtree, for tie-breaks
  RuleKind kind = RuleKind::Dict;
  int32_t rule = -1;        // dictionary/combination index
  const ChartItem* left = nullptr;
  const ChartItem* right = nullptr;
};

// materialized derivation detached from the chart
struct Tree {
  int i = 0, j = 0;
  NonTerminal sym = NonTerminal::N;
  PolarityDist dist;
  double score = 0.0;
  RuleKind kind = RuleKind::Dict;
  int32_t rule = -1;
  std::vector<Tree> children;
};

// label of an S-rooted tree: the root child's polarity; nullopt for S -> E
std::optional<Polarity> tree_label(const Tree& root);

// rule applications in a tree
int tree_rule_count(const Tree& root);

// "(S (P (N ...) but (P i still like it)))"; terminals come from `tokens`
std::string bracket_tree(const Tree& root, const std::vector<std::string>& tokens);

// per-grammar tables the decoder needs: combination shapes and the rule
// identifier order used for tie-breaking
class ParserTables {
 public:
  explicit ParserTables(const Grammar& g);

  const Grammar& grammar() const { return *grammar_; }

  struct CombShape {
    int n_slots = 0;
    Polarity slot_pol[2] = {Polarity::Negative, Polarity::Negative};
    // terminal blocks around the slots: before, between, after
    std::vector<std::string> block[3];
  };

  const CombShape& shape(int comb_index) const { return shapes_[comb_index]; }
  int32_t dict_rank(int index) const { return dict_rank_[index]; }
  int32_t comb_rank(int index) const { return comb_rank_[index]; }

 private:
  const Grammar* grammar_;
  std::vector<CombShape> shapes_;
  std::vector<int32_t> dict_rank_;  // rank of id() in sorted order
  std::vector<int32_t> comb_rank_;
};

struct DecodeOptions {
  int k = 30;
  Polarity fallback = Polarity::Negative;
};

struct DecodeResult {
  Polarity label = Polarity::Negative;
  bool no_evidence = false;
  std::vector<Tree> k_best;  // S-rooted, beam order; empty only when the
                             // chart has no full-span item at all
  std::optional<Tree> best;  // S-wrapped best derivation of the winning
                             // label; nullopt when no_evidence
};

// beam comparator order: higher score, then fewer rule applications, then
// smaller rule identifier, then children recursively
bool item_precedes(const ParserTables& tables, const ChartItem& a, const ChartItem& b);

DecodeResult decode(const ParserTables& tables, const RuleScores& scores,
                    const std::vector<std::string>& tokens, const DecodeOptions& opt);

}  // namespace sentiparse
