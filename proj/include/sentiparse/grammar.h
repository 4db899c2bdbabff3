#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sentiparse/label.h"

namespace sentiparse {

enum class NonTerminal : uint8_t { N = 0, P = 1, S = 2, E = 3 };

constexpr NonTerminal to_nonterminal(Polarity x) {
  return x == Polarity::Negative ? NonTerminal::N : NonTerminal::P;
}

constexpr char nonterminal_char(NonTerminal x) {
  constexpr char names[] = {'N', 'P', 'S', 'E'};
  return names[static_cast<int>(x)];
}

struct DictionaryRule {
  Polarity lhs = Polarity::Negative;
  std::vector<std::string> fragment;
  PolarityDist dist;
  int64_t count_neg = 0;
  int64_t count_pos = 0;

  std::string fragment_string() const;
  std::string id() const;  // e.g. "P→good"

  bool operator==(const DictionaryRule&) const = default;
};

enum class RuleType : uint8_t { Negation = 0, Strengthen = 1, Weaken = 2, Contrast = 3 };
constexpr int kRuleTypeCount = 4;

const char* rule_type_name(RuleType t);
std::optional<RuleType> parse_rule_type(std::string_view s);

struct PatternElem {
  bool is_slot = false;
  std::string terminal;                 // set when !is_slot
  Polarity slot = Polarity::Negative;   // set when is_slot

  static PatternElem term(std::string t) { return {false, std::move(t), Polarity::Negative}; }
  static PatternElem slot_of(Polarity p) { return {true, {}, p}; }

  bool operator==(const PatternElem&) const = default;
};

struct CombinationRule {
  Polarity lhs = Polarity::Negative;
  std::vector<PatternElem> pattern;
  RuleType type = RuleType::Negation;
  std::vector<double> theta;                        // size slot_count() + 1
  std::array<int64_t, kRuleTypeCount> type_counts{};

  int slot_count() const;
  int terminal_count() const;
  // slots in pattern order; empty entries for missing second slot
  std::array<int, 2> slot_positions() const;        // indices into pattern, -1 if absent
  const std::string* first_terminal() const;

  std::string pattern_string() const;               // e.g. "not [P]"
  std::string id() const;                           // e.g. "N→not [P]"

  // shape invariants: 1-2 slots, no adjacent slots, at least one terminal,
  // theta size, type arity (contrast = two differing slots, others = one)
  void validate() const;

  bool operator==(const CombinationRule&) const = default;
};

std::vector<PatternElem> parse_pattern(const std::vector<std::string>& tokens);

class Grammar {
 public:
  Grammar() = default;
  Grammar(std::vector<DictionaryRule> dict, std::vector<CombinationRule> comb,
          int l_max, double tau_c2);

  const std::vector<DictionaryRule>& dictionary() const { return dict_; }
  const std::vector<CombinationRule>& combinations() const { return comb_; }
  int l_max() const { return l_max_; }
  double tau_c2() const { return tau_c2_; }

  // dictionary rule whose fragment equals tokens[i..j), or -1
  int find_fragment(const std::vector<std::string>& tokens, size_t i, size_t j) const;
  int find_fragment_key(std::string_view key) const;  // key: tokens joined by ' '

  // combination rules (ascending indices) whose first terminal is `token`
  const std::vector<int>* combinations_anchored_by(const std::string& token) const;

  // token occurs somewhere in a dictionary fragment
  bool token_in_vocab(const std::string& token) const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static Grammar load(std::istream& in, const std::string& name);
  static Grammar load_file(const std::string& path);

  bool operator==(const Grammar& other) const;

 private:
  struct SvHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  struct SvEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const { return a == b; }
  };

  void build_index();  // validates, throws ConfigError

  std::vector<DictionaryRule> dict_;
  std::vector<CombinationRule> comb_;
  int l_max_ = 7;
  double tau_c2_ = 0.5;

  std::unordered_map<std::string, int, SvHash, SvEq> frag_index_;
  std::unordered_map<std::string, std::vector<int>> anchor_index_;
  std::unordered_set<std::string> vocab_;
};

}  // namespace sentiparse
