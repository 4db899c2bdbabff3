#include "sentiparse/induction.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "sentiparse/errors.h"
#include "sentiparse/text.h"

namespace sentiparse {

void InductionConfig::validate() const {
  if (l_max < 1) throw ConfigError("induction: l_max must be at least 1");
  if (tau_f < 1) throw ConfigError("induction: tau_f must be at least 1");
  if (!(tau_p > 0.5 && tau_p < 1.0)) throw ConfigError("induction: tau_p must lie in (0.5, 1)");
  if (!(tau_delta > 0.0 && tau_delta < 0.5)) {
    throw ConfigError("induction: tau_delta must lie in (0, 0.5)");
  }
  if (tau_r < 0) throw ConfigError("induction: tau_r must be non-negative");
  if (!(tau_c > 0.5 && tau_c <= 1.0)) throw ConfigError("induction: tau_c must lie in (0.5, 1]");
  if (iterations < 1) throw ConfigError("induction: iterations must be at least 1");
  if (!(tau_c2 >= 0.5 && tau_c2 <= 1.0)) throw ConfigError("induction: tau_c2 must lie in [0.5, 1]");
  if (min_fit_pairs < 1) throw ConfigError("induction: min_fit_pairs must be at least 1");
  if (!(fit.alpha > 0.0) || !std::isfinite(fit.alpha)) {
    throw ConfigError("induction: fit alpha must be positive");
  }
  if (!(fit.epsilon > 0.0)) throw ConfigError("induction: fit epsilon must be positive");
  if (fit.max_epochs < 1) throw ConfigError("induction: fit epoch cap must be at least 1");
}

NegationCover::NegationCover(const std::vector<std::string>& tokens,
                             const std::vector<CombinationRule>& rules) {
  const size_t n = tokens.size();
  for (const CombinationRule& rule : rules) {
    if (rule.type != RuleType::Negation) continue;
    if (rule.slot_count() != 1) continue;
    std::vector<const std::string*> prefix, suffix;
    bool past_slot = false;
    for (const PatternElem& e : rule.pattern) {
      if (e.is_slot) {
        past_slot = true;
      } else {
        (past_slot ? suffix : prefix).push_back(&e.terminal);
      }
    }
    const size_t a = prefix.size();
    const size_t b = suffix.size();
    auto matches = [&](const std::vector<const std::string*>& block, size_t at) {
      for (size_t q = 0; q < block.size(); ++q) {
        if (tokens[at + q] != *block[q]) return false;
      }
      return true;
    };
    // the slot start is pinned by the prefix; the end can stretch to the
    // farthest matching suffix position (or the sentence end)
    if (a == 0) {
      if (b == 0 || b >= n) continue;
      for (size_t r = n - b; r >= 1; --r) {
        if (matches(suffix, r)) {
          windows_.push_back({0, r});
          break;
        }
      }
    } else {
      if (a + 1 > n) continue;
      for (size_t q = 0; q + a + 1 <= n; ++q) {
        if (!matches(prefix, q)) continue;
        const size_t lo = q + a;
        if (b == 0) {
          windows_.push_back({lo, n});
        } else {
          for (size_t r = (n >= b ? n - b : 0); r >= lo + 1; --r) {
            if (matches(suffix, r)) {
              windows_.push_back({lo, r});
              break;
            }
            if (r == lo + 1) break;
          }
        }
      }
    }
  }
}

bool NegationCover::covers(size_t i, size_t j) const {
  for (const Window& w : windows_) {
    if (w.lo <= i && j <= w.hi) return true;
  }
  return false;
}

bool covered_by_negation(const std::vector<std::string>& tokens, size_t i, size_t j,
                         const std::vector<CombinationRule>& rules) {
  return NegationCover(tokens, rules).covers(i, j);
}

const FragmentStats* FragmentCounts::find(const std::string& key) const {
  auto it = table.find(key);
  return it == table.end() ? nullptr : &it->second;
}

FragmentCounts FragmentCounts::count(const Corpus& corpus,
                                     const std::vector<CombinationRule>& comb,
                                     int l_max, int64_t tau_f, bool apriori) {
  if (l_max < 1) throw ConfigError("counting: l_max must be at least 1");
  if (tau_f < 1) throw ConfigError("counting: tau_f must be at least 1");
  FragmentCounts fc;

  std::vector<NegationCover> covers;
  covers.reserve(corpus.size());
  for (const LabeledSentence& s : corpus.sentences) covers.emplace_back(s.tokens, comb);

  // key of this sentence's span -> saw at least one uncovered occurrence
  std::unordered_map<std::string, bool> occ;
  for (int len = 1; len <= l_max; ++len) {
    for (size_t si = 0; si < corpus.size(); ++si) {
      const auto& tokens = corpus.sentences[si].tokens;
      const int n = static_cast<int>(tokens.size());
      if (len > n) continue;
      occ.clear();
      for (int i = 0; i + len <= n; ++i) {
        const int j = i + len;
        std::string key = join_tokens(tokens, i, j);
        if (apriori && len >= 2) {
          // both length-(len-1) subsequences must already be frequent in
          // the raw counts; raw counts are monotone so this is lossless
          auto frequent = [&](const std::string& k) {
            const FragmentStats* st = fc.find(k);
            return st && st->raw >= tau_f;
          };
          std::string drop_last = key.substr(0, key.size() - tokens[j - 1].size() - 1);
          std::string drop_first = key.substr(tokens[i].size() + 1);
          if (!frequent(drop_last) || !frequent(drop_first)) continue;
        }
        bool uncovered = !covers[si].covers(i, j);
        auto [it, fresh] = occ.try_emplace(std::move(key), uncovered);
        if (!fresh && uncovered) it->second = true;
      }
      const Polarity label = corpus.sentences[si].label;
      for (const auto& [key, uncovered] : occ) {
        FragmentStats& st = fc.table[key];
        st.raw += 1;
        if (uncovered) {
          (label == Polarity::Negative ? st.n : st.p) += 1;
        }
      }
    }
  }
  return fc;
}

std::vector<DictionaryRule> mine_dictionary_rules(const Corpus& corpus,
                                                  const std::vector<CombinationRule>& comb,
                                                  const InductionConfig& cfg) {
  cfg.validate();
  FragmentCounts fc = FragmentCounts::count(corpus, comb, cfg.l_max, cfg.tau_f, true);

  // class reweighting keeps the smoothed estimate centered on unbalanced
  // corpora; on a balanced corpus both weights are exactly 1
  const int64_t s_n = corpus.count(Polarity::Negative);
  const int64_t s_p = corpus.count(Polarity::Positive);
  const double total = static_cast<double>(s_n + s_p);
  const double w_n = s_n > 0 ? total / (2.0 * static_cast<double>(s_n)) : 1.0;
  const double w_p = s_p > 0 ? total / (2.0 * static_cast<double>(s_p)) : 1.0;

  std::vector<const std::pair<const std::string, FragmentStats>*> rows;
  rows.reserve(fc.table.size());
  for (const auto& kv : fc.table) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(),
            [](const auto* x, const auto* y) { return x->first < y->first; });

  std::vector<DictionaryRule> out;
  for (const auto* kv : rows) {
    const FragmentStats& st = kv->second;
    if (st.total() < cfg.tau_f) continue;
    std::vector<std::string> tokens;
    {
      const std::string& key = kv->first;
      size_t start = 0;
      while (start <= key.size()) {
        size_t sp = key.find(' ', start);
        if (sp == std::string::npos) {
          tokens.push_back(key.substr(start));
          break;
        }
        tokens.push_back(key.substr(start, sp - start));
        start = sp + 1;
      }
    }
    if (all_stop_or_punct(tokens, 0, tokens.size())) continue;
    const double cn = w_n * static_cast<double>(st.n);
    const double cp = w_p * static_cast<double>(st.p);
    const double den = cn + cp + 2.0;
    const double p_neg = (cn + 1.0) / den;
    const double p_pos = (cp + 1.0) / den;
    if (p_neg == p_pos) continue;  // no polarity preference, no signal
    DictionaryRule d;
    d.lhs = p_neg > p_pos ? Polarity::Negative : Polarity::Positive;
    d.fragment = std::move(tokens);
    d.dist = {p_neg, p_pos};
    d.count_neg = st.n;
    d.count_pos = st.p;
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

// enumerates every slot generalization of every dictionary fragment:
// single subsequences above tau_p, and non-overlapping differing pairs.
// fn(whole, pattern, slot_probs, n_slots, type) with type -1 for untyped
template <class Fn>
void for_each_generalization(const std::vector<DictionaryRule>& dict,
                             const std::unordered_map<std::string, int>& by_key,
                             double tau_p, double tau_delta, Fn&& fn) {
  for (const DictionaryRule& whole : dict) {
    const auto& f = whole.fragment;
    const int len = static_cast<int>(f.size());
    const double p_f = whole.dist.prob(whole.lhs);

    auto sub_at = [&](int i, int j) -> const DictionaryRule* {
      auto it = by_key.find(join_tokens(f, i, j));
      if (it == by_key.end()) return nullptr;
      const DictionaryRule& sub = dict[it->second];
      return sub.dist.prob(sub.lhs) > tau_p ? &sub : nullptr;
    };

    for (int i = 0; i < len; ++i) {
      for (int j = i + 1; j <= len; ++j) {
        if (i == 0 && j == len) continue;  // a pattern needs a terminal
        const DictionaryRule* sub = sub_at(i, j);
        if (!sub) continue;
        const double p_w = sub->dist.prob(sub->lhs);
        int type;
        if (whole.lhs != sub->lhs) {
          type = static_cast<int>(RuleType::Negation);
        } else if (p_f > p_w + tau_delta) {
          type = static_cast<int>(RuleType::Strengthen);
        } else if (p_f < p_w - tau_delta) {
          type = static_cast<int>(RuleType::Weaken);
        } else {
          type = -1;
        }
        std::vector<PatternElem> pattern;
        pattern.reserve(len - (j - i) + 1);
        for (int t = 0; t < i; ++t) pattern.push_back(PatternElem::term(f[t]));
        pattern.push_back(PatternElem::slot_of(sub->lhs));
        for (int t = j; t < len; ++t) pattern.push_back(PatternElem::term(f[t]));
        double probs[2] = {p_w, 0.0};
        fn(whole, std::move(pattern), probs, 1, type);
      }
    }

    for (int i0 = 0; i0 < len; ++i0) {
      for (int j0 = i0 + 1; j0 <= len; ++j0) {
        const DictionaryRule* first = sub_at(i0, j0);
        if (!first) continue;
        for (int i1 = j0 + 1; i1 < len; ++i1) {  // gap keeps slots apart
          for (int j1 = i1 + 1; j1 <= len; ++j1) {
            const DictionaryRule* second = sub_at(i1, j1);
            if (!second) continue;
            if (first->lhs == second->lhs) continue;  // contrast needs a flip
            std::vector<PatternElem> pattern;
            for (int t = 0; t < i0; ++t) pattern.push_back(PatternElem::term(f[t]));
            pattern.push_back(PatternElem::slot_of(first->lhs));
            for (int t = j0; t < i1; ++t) pattern.push_back(PatternElem::term(f[t]));
            pattern.push_back(PatternElem::slot_of(second->lhs));
            for (int t = j1; t < len; ++t) pattern.push_back(PatternElem::term(f[t]));
            double probs[2] = {first->dist.prob(first->lhs), second->dist.prob(second->lhs)};
            fn(whole, std::move(pattern), probs, 2, static_cast<int>(RuleType::Contrast));
          }
        }
      }
    }
  }
}

std::unordered_map<std::string, int> index_fragments(const std::vector<DictionaryRule>& dict) {
  std::unordered_map<std::string, int> by_key;
  by_key.reserve(dict.size());
  for (size_t i = 0; i < dict.size(); ++i) {
    if (!by_key.emplace(dict[i].fragment_string(), static_cast<int>(i)).second) {
      throw ConfigError("duplicate dictionary fragment: " + dict[i].fragment_string());
    }
  }
  return by_key;
}

}  // namespace

std::vector<CombinationRule> mine_combination_rules(const std::vector<DictionaryRule>& dict,
                                                    const InductionConfig& cfg) {
  cfg.validate();
  auto by_key = index_fragments(dict);

  struct Candidate {
    CombinationRule rule;
    int64_t total = 0;
  };
  std::unordered_map<std::string, size_t> cand_index;
  std::vector<Candidate> cands;

  for_each_generalization(
      dict, by_key, cfg.tau_p, cfg.tau_delta,
      [&](const DictionaryRule& whole, std::vector<PatternElem>&& pattern, const double*,
          int, int type) {
        CombinationRule probe;
        probe.lhs = whole.lhs;
        probe.pattern = std::move(pattern);
        std::string key = probe.id();
        auto [it, fresh] = cand_index.try_emplace(std::move(key), cands.size());
        if (fresh) cands.push_back({std::move(probe), 0});
        Candidate& c = cands[it->second];
        c.total += 1;
        if (type >= 0) c.rule.type_counts[type] += 1;
      });

  std::vector<std::pair<std::string, size_t>> order(cand_index.begin(), cand_index.end());
  std::sort(order.begin(), order.end());

  std::vector<CombinationRule> out;
  for (const auto& [key, ix] : order) {
    Candidate& c = cands[ix];
    if (!(c.total > cfg.tau_r)) continue;
    int64_t typed = 0;
    for (int64_t tc : c.rule.type_counts) typed += tc;
    if (typed == 0) continue;
    int best = 0;
    for (int t = 1; t < kRuleTypeCount; ++t) {
      if (c.rule.type_counts[t] > c.rule.type_counts[best]) best = t;
    }
    const double purity =
        static_cast<double>(c.rule.type_counts[best]) / static_cast<double>(typed);
    if (!(purity > cfg.tau_c)) continue;
    c.rule.type = static_cast<RuleType>(best);
    c.rule.theta.assign(static_cast<size_t>(c.rule.slot_count()) + 1, 0.0);
    try {
      c.rule.validate();
    } catch (const ConfigError&) {
      continue;  // pattern violates grammar shape invariants
    }
    out.push_back(std::move(c.rule));
  }
  return out;
}

std::vector<std::vector<CompositionInput>> build_polarity_training(
    const std::vector<DictionaryRule>& dict, const std::vector<CombinationRule>& comb,
    const InductionConfig& cfg) {
  cfg.validate();
  auto by_key = index_fragments(dict);
  std::unordered_map<std::string, int> comb_by_id;
  comb_by_id.reserve(comb.size());
  for (size_t r = 0; r < comb.size(); ++r) {
    if (!comb_by_id.emplace(comb[r].id(), static_cast<int>(r)).second) {
      throw ConfigError("duplicate combination rule: " + comb[r].id());
    }
  }

  std::vector<std::vector<CompositionInput>> out(comb.size());
  for_each_generalization(
      dict, by_key, cfg.tau_p, cfg.tau_delta,
      [&](const DictionaryRule& whole, std::vector<PatternElem>&& pattern,
          const double* slot_probs, int n_slots, int) {
        CombinationRule probe;
        probe.lhs = whole.lhs;
        probe.pattern = std::move(pattern);
        auto it = comb_by_id.find(probe.id());
        if (it == comb_by_id.end()) return;
        CompositionInput ci;
        ci.dim = n_slots + 1;
        ci.x = {1.0, slot_probs[0], n_slots == 2 ? slot_probs[1] : 0.0};
        ci.y = whole.dist.prob(whole.lhs);
        out[it->second].push_back(ci);
      });
  return out;
}

Grammar learn_grammar(const Corpus& corpus, const InductionConfig& cfg, SeededRng& rng,
                      LearnDiagnostics* diag, std::ostream* log) {
  cfg.validate();
  if (diag) *diag = LearnDiagnostics{};

  std::vector<DictionaryRule> dict;
  std::vector<CombinationRule> comb;
  for (int t = 0; t < cfg.iterations; ++t) {
    dict = mine_dictionary_rules(corpus, comb, cfg);
    comb = mine_combination_rules(dict, cfg);
    if (diag) {
      diag->dict_sizes.push_back(dict.size());
      diag->comb_sizes.push_back(comb.size());
    }
    if (log) {
      *log << "[induce] iteration " << (t + 1) << "/" << cfg.iterations << ": "
           << dict.size() << " dictionary rules, " << comb.size()
           << " combination rules\n";
    }
  }

  auto training = build_polarity_training(dict, comb, cfg);
  std::vector<CombinationRule> kept;
  kept.reserve(comb.size());
  for (size_t r = 0; r < comb.size(); ++r) {
    const auto& pairs = training[r];
    LearnDiagnostics::RuleInfo info;
    info.id = comb[r].id();
    info.type_counts = comb[r].type_counts;
    info.total = static_cast<int64_t>(pairs.size());
    info.pairs = static_cast<int64_t>(pairs.size());
    if (static_cast<int>(pairs.size()) < cfg.min_fit_pairs) {
      if (log) {
        *log << "[induce] warning: dropping " << info.id << ", only " << pairs.size()
             << " training pairs\n";
      }
    } else {
      FitResult fit = fit_rule_params(comb[r].slot_count() + 1, pairs, cfg.fit, rng);
      CombinationRule rule = comb[r];
      rule.theta = fit.theta;
      info.kept = true;
      info.converged = fit.converged;
      info.cost = fit.cost;
      kept.push_back(std::move(rule));
    }
    if (diag) diag->rules.push_back(std::move(info));
  }
  if (log) {
    *log << "[induce] final grammar: " << dict.size() << " dictionary rules, "
         << kept.size() << " combination rules\n";
  }
  return Grammar(std::move(dict), std::move(kept), cfg.l_max, cfg.tau_c2);
}

}  // namespace sentiparse
