#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentiparse/corpus.h"
#include "sentiparse/grammar.h"
#include "sentiparse/polarity.h"
#include "sentiparse/rng.h"

namespace sentiparse {

struct InductionConfig {
  int l_max = 7;
  int64_t tau_f = 4;       // minimum fragment count (inclusive)
  double tau_p = 0.7;      // replacement confidence, strict
  double tau_delta = 0.05; // strengthen/weaken margin
  int64_t tau_r = 4;       // rule count, strict
  double tau_c = 0.75;     // type purity over typed counts, strict
  int iterations = 3;
  double tau_c2 = 0.5;
  FitOptions fit;
  int min_fit_pairs = 3;

  void validate() const;  // throws ConfigError
};

struct FragmentStats {
  int64_t n = 0;    // negation-aware per-review count, negative reviews
  int64_t p = 0;
  int64_t raw = 0;  // negation-unaware per-review count, used for pruning
  int64_t total() const { return n + p; }
};

// per-sentence precomputation of which spans lie inside a negation slot
class NegationCover {
 public:
  NegationCover(const std::vector<std::string>& tokens,
                const std::vector<CombinationRule>& rules);
  bool covers(size_t i, size_t j) const;

 private:
  struct Window {
    size_t lo;  // slot starts here (0 when the pattern has no prefix)
    size_t hi;  // largest feasible slot end
  };            // the slot can cover any fragment with lo <= i and j <= hi
  std::vector<Window> windows_;
};

// true when tokens[i..j) lies entirely inside the slot of some match of a
// negation-typed rule
bool covered_by_negation(const std::vector<std::string>& tokens, size_t i, size_t j,
                         const std::vector<CombinationRule>& rules);

struct FragmentCounts {
  std::unordered_map<std::string, FragmentStats> table;  // key: space-joined fragment

  const FragmentStats* find(const std::string& key) const;

  // length-ordered counting, once per review per fragment; occurrences
  // covered by a negation rule do not count toward n/p. With apriori=true,
  // a fragment is counted only if both length-(l-1) subsequences reached
  // raw count >= tau_f; raw counts are monotone, so the surviving set and
  // counts match unpruned counting exactly.
  static FragmentCounts count(const Corpus& corpus,
                              const std::vector<CombinationRule>& comb,
                              int l_max, int64_t tau_f, bool apriori);
};

std::vector<DictionaryRule> mine_dictionary_rules(const Corpus& corpus,
                                                  const std::vector<CombinationRule>& comb,
                                                  const InductionConfig& cfg);

std::vector<CombinationRule> mine_combination_rules(const std::vector<DictionaryRule>& dict,
                                                    const InductionConfig& cfg);

// regression data per combination rule (parallel to `comb`): one instance
// per (whole fragment, replaced subsequence) occurrence that generalizes to
// the rule
std::vector<std::vector<CompositionInput>> build_polarity_training(
    const std::vector<DictionaryRule>& dict, const std::vector<CombinationRule>& comb,
    const InductionConfig& cfg);

struct LearnDiagnostics {
  struct RuleInfo {
    std::string id;
    std::array<int64_t, kRuleTypeCount> type_counts{};
    int64_t total = 0;
    int64_t pairs = 0;
    bool kept = false;       // false: dropped for lack of regression data
    bool converged = false;
    double cost = 0.0;
  };
  std::vector<RuleInfo> rules;
  std::vector<size_t> dict_sizes;  // per iteration
  std::vector<size_t> comb_sizes;
};

Grammar learn_grammar(const Corpus& corpus, const InductionConfig& cfg, SeededRng& rng,
                      LearnDiagnostics* diag = nullptr, std::ostream* log = nullptr);

}  // namespace sentiparse
