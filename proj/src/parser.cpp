#include "sentiparse/parser.h"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <numeric>
#include <string_view>

#include "sentiparse/errors.h"
#include "sentiparse/polarity.h"
#include "sentiparse/text.h"

namespace sentiparse {

RuleScores RuleScores::zeros(const Grammar& g) {
  return {std::vector<double>(g.dictionary().size(), 0.0),
          std::vector<double>(g.combinations().size(), 0.0)};
}

std::optional<Polarity> tree_label(const Tree& root) {
  if (root.sym != NonTerminal::S || root.children.size() != 1) {
    throw InternalError("tree_label: not an S-rooted tree");
  }
  switch (root.children[0].sym) {
    case NonTerminal::N: return Polarity::Negative;
    case NonTerminal::P: return Polarity::Positive;
    default: return std::nullopt;
  }
}

int tree_rule_count(const Tree& root) {
  int n = 1;
  for (const auto& c : root.children) n += tree_rule_count(c);
  return n;
}

namespace {

void bracket_rec(const Tree& node, const std::vector<std::string>& tokens,
                 std::string& out) {
  out += '(';
  out += nonterminal_char(node.sym);
  int pos = node.i;
  for (const auto& child : node.children) {
    for (int t = pos; t < child.i; ++t) {
      out += ' ';
      out += tokens[t];
    }
    out += ' ';
    bracket_rec(child, tokens, out);
    pos = child.j;
  }
  for (int t = pos; t < node.j; ++t) {
    out += ' ';
    out += tokens[t];
  }
  out += ')';
}

}  // namespace

std::string bracket_tree(const Tree& root, const std::vector<std::string>& tokens) {
  std::string out;
  bracket_rec(root, tokens, out);
  return out;
}

ParserTables::ParserTables(const Grammar& g) : grammar_(&g) {
  const auto& comb = g.combinations();
  shapes_.resize(comb.size());
  for (size_t r = 0; r < comb.size(); ++r) {
    CombShape& sh = shapes_[r];
    sh.n_slots = 0;
    int block = 0;
    for (const auto& e : comb[r].pattern) {
      if (e.is_slot) {
        sh.slot_pol[sh.n_slots++] = e.slot;
        block = sh.n_slots;
      } else {
        sh.block[block].push_back(e.terminal);
      }
    }
  }

  auto rank_by_id = [](auto&& rules, auto&& id_of) {
    std::vector<std::string> ids;
    ids.reserve(rules.size());
    for (const auto& r : rules) ids.push_back(id_of(r));
    std::vector<int32_t> order(rules.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int32_t a, int32_t b) { return ids[a] < ids[b]; });
    std::vector<int32_t> rank(rules.size());
    for (size_t k = 0; k < order.size(); ++k) rank[order[k]] = static_cast<int32_t>(k);
    return rank;
  };
  dict_rank_ = rank_by_id(g.dictionary(), [](const DictionaryRule& d) { return d.id(); });
  comb_rank_ = rank_by_id(comb, [](const CombinationRule& c) { return c.id(); });
}

namespace {

int cmp_item(const ParserTables& T, const ChartItem& a, const ChartItem& b);

template <class V>
int cmp3(V a, V b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

// mirrors lexicographic order of the textual rule identifiers:
// A|<lhs>|EX, C|<id>, D|<id>, G|<lhs>, O|E, S|<child sym>
int cmp_rule_id(const ParserTables& T, const ChartItem& a, const ChartItem& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case RuleKind::Dict: return cmp3(T.dict_rank(a.rule), T.dict_rank(b.rule));
    case RuleKind::Comb: return cmp3(T.comb_rank(a.rule), T.comb_rank(b.rule));
    case RuleKind::Glue: return cmp3(a.sym, b.sym);
    case RuleKind::Aux: {
      if (int c = cmp3(a.sym, b.sym)) return c;
      bool a_eleft = a.left && a.left->sym == NonTerminal::E;
      bool b_eleft = b.left && b.left->sym == NonTerminal::E;
      return cmp3(!a_eleft, !b_eleft);  // E-first variant sorts first
    }
    case RuleKind::Oov: return 0;
    case RuleKind::Start: return cmp3(a.left->sym, b.left->sym);
  }
  return 0;
}

int cmp_child(const ParserTables& T, const ChartItem* x, const ChartItem* y) {
  if (!x || !y) return cmp3(x != nullptr, y != nullptr);
  if (int c = cmp3(x->i, y->i)) return c;
  if (int c = cmp3(x->j, y->j)) return c;
  if (int c = cmp3(x->sym, y->sym)) return c;
  return cmp_item(T, *x, *y);
}

int cmp_item(const ParserTables& T, const ChartItem& a, const ChartItem& b) {
  if (a.score != b.score) return a.score > b.score ? -1 : 1;
  if (a.n_rules != b.n_rules) return a.n_rules < b.n_rules ? -1 : 1;
  if (int c = cmp_rule_id(T, a, b)) return c;
  if (int c = cmp_child(T, a.left, b.left)) return c;
  return cmp_child(T, a.right, b.right);
}

// fixed-capacity beam ordered by cmp_item
struct Beam {
  std::vector<ChartItem> items;
  int k = 0;

  void reset(int k_) {
    items.clear();
    k = k_;
  }
  bool full() const { return static_cast<int>(items.size()) >= k; }
  double worst() const { return items.back().score; }

  void insert(const ParserTables& T, const ChartItem& cand) {
    if (full()) {
      // strictly worse score can never displace; ties go through the comparator
      if (cand.score < items.back().score) return;
      if (cmp_item(T, cand, items.back()) >= 0) return;
    }
    size_t lo = 0, hi = items.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cmp_item(T, cand, items[mid]) < 0) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    items.insert(items.begin() + lo, cand);
    if (static_cast<int>(items.size()) > k) items.pop_back();
  }
};

Tree to_tree(const ChartItem* it) {
  Tree t;
  t.i = it->i;
  t.j = it->j;
  t.sym = it->sym;
  t.dist = it->dist;
  t.score = it->score;
  t.kind = it->kind;
  t.rule = it->rule;
  if (it->left) t.children.push_back(to_tree(it->left));
  if (it->right) t.children.push_back(to_tree(it->right));
  return t;
}

using CellRow = std::array<std::vector<const ChartItem*>, 4>;

}  // namespace

DecodeResult decode(const ParserTables& T, const RuleScores& rs,
                    const std::vector<std::string>& tokens, const DecodeOptions& opt) {
  const Grammar& g = T.grammar();
  const int n = static_cast<int>(tokens.size());
  if (n == 0) throw ConfigError("decode: empty sentence");
  if (opt.k < 1) throw ConfigError("decode: beam width must be at least 1");
  if (rs.dict.size() != g.dictionary().size() || rs.comb.size() != g.combinations().size()) {
    throw InternalError("decode: rule score table does not match the grammar");
  }

  // prefix counts of in-vocabulary tokens; a span is OOV-eligible iff it has none
  std::vector<int> invocab(n + 1, 0);
  for (int t = 0; t < n; ++t) {
    invocab[t + 1] = invocab[t] + (g.token_in_vocab(tokens[t]) ? 1 : 0);
  }
  auto all_oov = [&](int i, int j) { return invocab[j] - invocab[i] == 0; };

  std::deque<ChartItem> arena;
  std::vector<CellRow> cells((n + 1) * (n + 1));
  auto cell = [&](int i, int j) -> CellRow& { return cells[i * (n + 1) + j]; };

  Beam beam_n, beam_p;
  auto beam_of = [&](Polarity x) -> Beam& {
    return x == Polarity::Negative ? beam_n : beam_p;
  };
  std::vector<std::string_view> seen;

  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      beam_n.reset(opt.k);
      beam_p.reset(opt.k);

      // dictionary rules
      if (len <= g.l_max()) {
        int d = g.find_fragment(tokens, i, j);
        if (d >= 0) {
          const DictionaryRule& rule = g.dictionary()[d];
          ChartItem cand;
          cand.i = i;
          cand.j = j;
          cand.sym = to_nonterminal(rule.lhs);
          cand.dist = rule.dist;
          cand.score = rs.dict[d];
          cand.n_rules = 1;
          cand.kind = RuleKind::Dict;
          cand.rule = d;
          beam_of(rule.lhs).insert(T, cand);
        }
      }

      // glue and auxiliary rules over every split
      for (int k = i + 1; k < j; ++k) {
        const CellRow& lc = cell(i, k);
        const CellRow& rc = cell(k, j);

        auto min_threshold = [&]() {
          if (!beam_n.full() || !beam_p.full()) {
            return -std::numeric_limits<double>::infinity();
          }
          return std::min(beam_n.worst(), beam_p.worst());
        };

        for (int sl = 0; sl < 2; ++sl) {
          const auto& L = lc[sl];
          if (L.empty()) continue;
          for (int sr = 0; sr < 2; ++sr) {
            const auto& R = rc[sr];
            if (R.empty()) continue;
            for (const ChartItem* l : L) {
              // both lists are sorted best-first, so once even the best
              // partner cannot reach either beam we are done with this pair
              if (l->score + R[0]->score < min_threshold()) break;
              for (const ChartItem* r : R) {
                double s = l->score + r->score;
                if (s < min_threshold()) break;
                double both_neg = l->dist.p_neg * r->dist.p_neg;
                double both_pos = l->dist.p_pos * r->dist.p_pos;
                double den = both_neg + both_pos;
                if (den == 0.0) {
                  throw EvalError("glue of contradictory certain distributions");
                }
                both_neg /= den;
                both_pos /= den;
                if (both_neg == both_pos) continue;  // tie fails the agreement constraint
                ChartItem cand;
                cand.i = i;
                cand.j = j;
                cand.sym = both_neg > both_pos ? NonTerminal::N : NonTerminal::P;
                cand.dist = {both_neg, both_pos};
                cand.score = s;
                cand.n_rules = l->n_rules + r->n_rules + 1;
                cand.kind = RuleKind::Glue;
                cand.rule = -1;
                cand.left = l;
                cand.right = r;
                beam_of(both_neg > both_pos ? Polarity::Negative : Polarity::Positive)
                    .insert(T, cand);
              }
            }
          }
        }

        // X -> E X1 and X -> X1 E keep the polar child's distribution
        auto aux = [&](const ChartItem* e, const ChartItem* x, bool e_first) {
          ChartItem cand;
          cand.i = i;
          cand.j = j;
          cand.sym = x->sym;
          cand.dist = eval_auxiliary(x->dist);
          cand.score = e->score + x->score;
          cand.n_rules = e->n_rules + x->n_rules + 1;
          cand.kind = RuleKind::Aux;
          cand.rule = -1;
          cand.left = e_first ? e : x;
          cand.right = e_first ? x : e;
          beam_of(x->sym == NonTerminal::N ? Polarity::Negative : Polarity::Positive)
              .insert(T, cand);
        };
        if (!lc[static_cast<int>(NonTerminal::E)].empty()) {
          const ChartItem* e = lc[static_cast<int>(NonTerminal::E)][0];
          for (int sr = 0; sr < 2; ++sr) {
            for (const ChartItem* r : rc[sr]) aux(e, r, true);
          }
        }
        if (!rc[static_cast<int>(NonTerminal::E)].empty()) {
          const ChartItem* e = rc[static_cast<int>(NonTerminal::E)][0];
          for (int sl = 0; sl < 2; ++sl) {
            for (const ChartItem* l : lc[sl]) aux(e, l, false);
          }
        }
      }

      // combination rules, retrieved by first terminal
      if (!g.combinations().empty()) {
        seen.clear();
        for (int t = i; t < j; ++t) {
          std::string_view tok = tokens[t];
          if (std::find(seen.begin(), seen.end(), tok) != seen.end()) continue;
          seen.push_back(tok);
          const std::vector<int>* anchored = g.combinations_anchored_by(tokens[t]);
          if (!anchored) continue;
          for (int rix : *anchored) {
            const CombinationRule& rule = g.combinations()[rix];
            const ParserTables::CombShape& sh = T.shape(rix);
            const int a = static_cast<int>(sh.block[0].size());
            auto block_matches = [&](const std::vector<std::string>& block, int at) {
              for (size_t q = 0; q < block.size(); ++q) {
                if (tokens[at + q] != block[q]) return false;
              }
              return true;
            };
            if (sh.n_slots == 1) {
              const int b = static_cast<int>(sh.block[1].size());
              if (len < a + b + 1) continue;
              if (!block_matches(sh.block[0], i)) continue;
              if (!block_matches(sh.block[1], j - b)) continue;
              const auto& slot_items =
                  cell(i + a, j - b)[static_cast<int>(to_nonterminal(sh.slot_pol[0]))];
              const double local = rs.comb[rix];
              for (const ChartItem* it : slot_items) {
                double p = it->dist.prob(sh.slot_pol[0]);
                if (!(p > g.tau_c2())) continue;
                PolarityDist dist = eval_combination(rule, &p, 1);
                if (dist.lean() != rule.lhs) continue;
                ChartItem cand;
                cand.i = i;
                cand.j = j;
                cand.sym = to_nonterminal(rule.lhs);
                cand.dist = dist;
                cand.score = it->score + local;
                cand.n_rules = it->n_rules + 1;
                cand.kind = RuleKind::Comb;
                cand.rule = rix;
                cand.left = it;
                beam_of(rule.lhs).insert(T, cand);
              }
            } else {
              const int m = static_cast<int>(sh.block[1].size());
              const int b = static_cast<int>(sh.block[2].size());
              if (len < a + b + m + 2) continue;
              if (!block_matches(sh.block[0], i)) continue;
              if (b > 0 && !block_matches(sh.block[2], j - b)) continue;
              const double local = rs.comb[rix];
              for (int k = i + a + 1; k + m + 1 <= j - b; ++k) {
                if (!block_matches(sh.block[1], k)) continue;
                const auto& items1 =
                    cell(i + a, k)[static_cast<int>(to_nonterminal(sh.slot_pol[0]))];
                const auto& items2 =
                    cell(k + m, j - b)[static_cast<int>(to_nonterminal(sh.slot_pol[1]))];
                for (const ChartItem* it1 : items1) {
                  double probs[2];
                  probs[0] = it1->dist.prob(sh.slot_pol[0]);
                  if (!(probs[0] > g.tau_c2())) continue;
                  for (const ChartItem* it2 : items2) {
                    probs[1] = it2->dist.prob(sh.slot_pol[1]);
                    if (!(probs[1] > g.tau_c2())) continue;
                    PolarityDist dist = eval_combination(rule, probs, 2);
                    if (dist.lean() != rule.lhs) continue;
                    ChartItem cand;
                    cand.i = i;
                    cand.j = j;
                    cand.sym = to_nonterminal(rule.lhs);
                    cand.dist = dist;
                    cand.score = it1->score + it2->score + local;
                    cand.n_rules = it1->n_rules + it2->n_rules + 1;
                    cand.kind = RuleKind::Comb;
                    cand.rule = rix;
                    cand.left = it1;
                    cand.right = it2;
                    beam_of(rule.lhs).insert(T, cand);
                  }
                }
              }
            }
          }
        }
      }

      // freeze the span
      CellRow& row = cell(i, j);
      for (Polarity x : {Polarity::Negative, Polarity::Positive}) {
        Beam& b = beam_of(x);
        auto& list = row[static_cast<int>(to_nonterminal(x))];
        list.reserve(b.items.size());
        for (const ChartItem& it : b.items) {
          arena.push_back(it);
          list.push_back(&arena.back());
        }
      }
      if (all_oov(i, j)) {
        ChartItem e;
        e.i = i;
        e.j = j;
        e.sym = NonTerminal::E;
        e.dist = {0.5, 0.5};
        e.score = 0.0;
        e.n_rules = 1;
        e.kind = RuleKind::Oov;
        e.rule = -1;
        arena.push_back(e);
        row[static_cast<int>(NonTerminal::E)].push_back(&arena.back());
      }
    }
  }

  // start rules wrap the full span
  Beam s_beam;
  s_beam.reset(opt.k);
  const CellRow& top = cell(0, n);
  for (NonTerminal y : {NonTerminal::N, NonTerminal::P, NonTerminal::E}) {
    for (const ChartItem* it : top[static_cast<int>(y)]) {
      ChartItem cand;
      cand.i = 0;
      cand.j = n;
      cand.sym = NonTerminal::S;
      cand.dist = it->dist;
      cand.score = it->score;
      cand.n_rules = it->n_rules + 1;
      cand.kind = RuleKind::Start;
      cand.rule = -1;
      cand.left = it;
      s_beam.insert(T, cand);
    }
  }

  DecodeResult out;
  const auto& top_n = top[static_cast<int>(NonTerminal::N)];
  const auto& top_p = top[static_cast<int>(NonTerminal::P)];
  const ChartItem* winner = nullptr;
  if (top_n.empty() && top_p.empty()) {
    out.label = opt.fallback;
    out.no_evidence = true;
  } else if (top_n.empty()) {
    out.label = Polarity::Positive;
    winner = top_p[0];
  } else if (top_p.empty()) {
    out.label = Polarity::Negative;
    winner = top_n[0];
  } else {
    bool neg = cmp_item(T, *top_n[0], *top_p[0]) < 0;
    out.label = neg ? Polarity::Negative : Polarity::Positive;
    winner = neg ? top_n[0] : top_p[0];
  }
  if (winner) {
    ChartItem wrap;
    wrap.i = 0;
    wrap.j = n;
    wrap.sym = NonTerminal::S;
    wrap.dist = winner->dist;
    wrap.score = winner->score;
    wrap.n_rules = winner->n_rules + 1;
    wrap.kind = RuleKind::Start;
    wrap.rule = -1;
    wrap.left = winner;
    out.best = to_tree(&wrap);
  }
  out.k_best.reserve(s_beam.items.size());
  for (const ChartItem& it : s_beam.items) out.k_best.push_back(to_tree(&it));
  return out;
}

bool item_precedes(const ParserTables& tables, const ChartItem& a, const ChartItem& b) {
  return cmp_item(tables, a, b) < 0;
}

}  // namespace sentiparse
