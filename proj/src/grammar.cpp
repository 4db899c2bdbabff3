#include "sentiparse/grammar.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sentiparse/errors.h"
#include "sentiparse/text.h"

namespace sentiparse {

namespace {

const char* kArrow = "→";  // the arrow used in rule and feature identifiers

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& what) {
  std::string buf(s);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw ParseError("bad " + what + ": '" + buf + "'");
  }
  return v;
}

int64_t parse_int(std::string_view s, const std::string& what) {
  std::string buf(s);
  char* end = nullptr;
  int64_t v = std::strtoll(buf.c_str(), &end, 10);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw ParseError("bad " + what + ": '" + buf + "'");
  }
  return v;
}

Polarity parse_lhs(std::string_view s) {
  if (s == "N") return Polarity::Negative;
  if (s == "P") return Polarity::Positive;
  throw ParseError("bad rule lhs: '" + std::string(s) + "'");
}

void check_token(const std::string& t) {
  if (t.empty()) throw ParseError("empty token");
  for (unsigned char c : t) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw ParseError("token contains whitespace: '" + t + "'");
    }
  }
}

}  // namespace

std::string DictionaryRule::fragment_string() const {
  return join_tokens(fragment, 0, fragment.size());
}

std::string DictionaryRule::id() const {
  std::string out(1, polarity_char(lhs));
  out += kArrow;
  out += fragment_string();
  return out;
}

const char* rule_type_name(RuleType t) {
  switch (t) {
    case RuleType::Negation: return "negation";
    case RuleType::Strengthen: return "strengthen";
    case RuleType::Weaken: return "weaken";
    case RuleType::Contrast: return "contrast";
  }
  return "?";
}

std::optional<RuleType> parse_rule_type(std::string_view s) {
  if (s == "negation") return RuleType::Negation;
  if (s == "strengthen") return RuleType::Strengthen;
  if (s == "weaken") return RuleType::Weaken;
  if (s == "contrast") return RuleType::Contrast;
  return std::nullopt;
}

int CombinationRule::slot_count() const {
  int n = 0;
  for (const auto& e : pattern) n += e.is_slot;
  return n;
}

int CombinationRule::terminal_count() const {
  return static_cast<int>(pattern.size()) - slot_count();
}

std::array<int, 2> CombinationRule::slot_positions() const {
  std::array<int, 2> out = {-1, -1};
  int k = 0;
  for (size_t p = 0; p < pattern.size(); ++p) {
    if (pattern[p].is_slot && k < 2) out[k++] = static_cast<int>(p);
  }
  return out;
}

const std::string* CombinationRule::first_terminal() const {
  for (const auto& e : pattern) {
    if (!e.is_slot) return &e.terminal;
  }
  return nullptr;
}

std::string CombinationRule::pattern_string() const {
  std::string out;
  for (size_t p = 0; p < pattern.size(); ++p) {
    if (p > 0) out += ' ';
    if (pattern[p].is_slot) {
      out += '[';
      out += polarity_char(pattern[p].slot);
      out += ']';
    } else {
      out += pattern[p].terminal;
    }
  }
  return out;
}

std::string CombinationRule::id() const {
  std::string out(1, polarity_char(lhs));
  out += kArrow;
  out += pattern_string();
  return out;
}

void CombinationRule::validate() const {
  auto fail = [&](const std::string& msg) {
    throw ConfigError("combination rule '" + id() + "': " + msg);
  };
  if (pattern.empty()) fail("empty pattern");
  int slots = slot_count();
  if (slots < 1 || slots > 2) fail("needs 1 or 2 slots");
  if (terminal_count() < 1) fail("needs at least one terminal");
  for (size_t p = 0; p + 1 < pattern.size(); ++p) {
    if (pattern[p].is_slot && pattern[p + 1].is_slot) fail("adjacent slots");
  }
  for (const auto& e : pattern) {
    if (e.is_slot) continue;
    try {
      check_token(e.terminal);
    } catch (const ParseError& err) {
      fail(err.what());
    }
    if (e.terminal == "[N]" || e.terminal == "[P]") fail("terminal spelled like a slot");
  }
  if (type == RuleType::Contrast) {
    if (slots != 2) fail("contrast rules need two slots");
    auto pos = slot_positions();
    if (pattern[pos[0]].slot == pattern[pos[1]].slot) {
      fail("contrast slots must differ in polarity");
    }
  } else if (slots != 1) {
    fail(std::string(rule_type_name(type)) + " rules need exactly one slot");
  }
  if (theta.size() != static_cast<size_t>(slots) + 1) {
    fail("theta size must be slot count + 1");
  }
  for (double t : theta) {
    if (!std::isfinite(t)) fail("non-finite theta");
  }
  for (int64_t c : type_counts) {
    if (c < 0) fail("negative type count");
  }
}

std::vector<PatternElem> parse_pattern(const std::vector<std::string>& tokens) {
  std::vector<PatternElem> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t == "[N]") {
      out.push_back(PatternElem::slot_of(Polarity::Negative));
    } else if (t == "[P]") {
      out.push_back(PatternElem::slot_of(Polarity::Positive));
    } else {
      out.push_back(PatternElem::term(t));
    }
  }
  return out;
}

Grammar::Grammar(std::vector<DictionaryRule> dict, std::vector<CombinationRule> comb,
                 int l_max, double tau_c2)
    : dict_(std::move(dict)), comb_(std::move(comb)), l_max_(l_max), tau_c2_(tau_c2) {
  build_index();
}

void Grammar::build_index() {
  if (l_max_ < 1) throw ConfigError("l_max must be at least 1");
  if (!(tau_c2_ >= 0.5 && tau_c2_ <= 1.0)) {
    throw ConfigError("tau_c2 must lie in [0.5, 1]");
  }

  frag_index_.clear();
  anchor_index_.clear();
  vocab_.clear();

  for (size_t r = 0; r < dict_.size(); ++r) {
    const DictionaryRule& d = dict_[r];
    if (d.fragment.empty() || d.fragment.size() > static_cast<size_t>(l_max_)) {
      throw ConfigError("dictionary fragment length out of [1, l_max]: '" +
                        d.fragment_string() + "'");
    }
    for (const auto& t : d.fragment) {
      try {
        check_token(t);
      } catch (const ParseError& e) {
        throw ConfigError("dictionary rule '" + d.id() + "': " + e.what());
      }
    }
    if (!d.dist.valid()) {
      throw ConfigError("dictionary rule '" + d.id() + "': invalid distribution");
    }
    auto lean = d.dist.lean();
    if (!lean) {
      throw ConfigError("dictionary rule '" + d.id() + "': tied distribution");
    }
    if (*lean != d.lhs) {
      throw ConfigError("dictionary rule '" + d.id() + "': lhs disagrees with argmax");
    }
    if (d.count_neg < 0 || d.count_pos < 0) {
      throw ConfigError("dictionary rule '" + d.id() + "': negative count");
    }
    if (all_stop_or_punct(d.fragment, 0, d.fragment.size())) {
      throw ConfigError("dictionary rule '" + d.id() +
                        "': fragment is all stop words and punctuation");
    }
    auto [it, fresh] = frag_index_.emplace(d.fragment_string(), static_cast<int>(r));
    if (!fresh) {
      throw ConfigError("duplicate dictionary fragment: '" + d.fragment_string() + "'");
    }
    for (const auto& t : d.fragment) vocab_.insert(t);
  }

  std::unordered_set<std::string> comb_ids;
  for (size_t r = 0; r < comb_.size(); ++r) {
    const CombinationRule& c = comb_[r];
    c.validate();
    if (!comb_ids.insert(c.id()).second) {
      throw ConfigError("duplicate combination rule: '" + c.id() + "'");
    }
    anchor_index_[*c.first_terminal()].push_back(static_cast<int>(r));
  }
}

int Grammar::find_fragment(const std::vector<std::string>& tokens, size_t i, size_t j) const {
  return find_fragment_key(join_tokens(tokens, i, j));
}

int Grammar::find_fragment_key(std::string_view key) const {
  auto it = frag_index_.find(key);
  return it == frag_index_.end() ? -1 : it->second;
}

const std::vector<int>* Grammar::combinations_anchored_by(const std::string& token) const {
  auto it = anchor_index_.find(token);
  return it == anchor_index_.end() ? nullptr : &it->second;
}

bool Grammar::token_in_vocab(const std::string& token) const {
  return vocab_.count(token) != 0;
}

bool Grammar::operator==(const Grammar& other) const {
  return dict_ == other.dict_ && comb_ == other.comb_ && l_max_ == other.l_max_ &&
         tau_c2_ == other.tau_c2_;
}

void Grammar::save(std::ostream& out) const {
  out << "sgrammar v1 lmax=" << l_max_;
  if (tau_c2_ != 0.5) out << " tauc2=" << format_double(tau_c2_);
  out << '\n';
  for (const auto& d : dict_) {
    out << "D " << polarity_char(d.lhs) << ' ' << format_double(d.dist.p_neg) << ' '
        << format_double(d.dist.p_pos) << ' ' << d.count_neg << ' ' << d.count_pos
        << '\t' << d.fragment_string() << '\n';
  }
  for (const auto& c : comb_) {
    out << "C " << polarity_char(c.lhs) << ' ' << rule_type_name(c.type) << ' ';
    for (size_t k = 0; k < c.theta.size(); ++k) {
      if (k > 0) out << ',';
      out << format_double(c.theta[k]);
    }
    out << '\t' << c.pattern_string();
    bool have_counts = false;
    for (int64_t v : c.type_counts) have_counts |= v != 0;
    if (have_counts) {
      out << "\tn=" << c.type_counts[0] << ",s=" << c.type_counts[1]
          << ",w=" << c.type_counts[2] << ",c=" << c.type_counts[3];
    }
    out << '\n';
  }
}

void Grammar::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open grammar file for writing: " + path);
  save(out);
  if (!out) throw ParseError("failed writing grammar file: " + path);
}

Grammar Grammar::load(std::istream& in, const std::string& name) {
  std::string line;
  size_t lineno = 0;
  auto where = [&] { return name + ":" + std::to_string(lineno) + ": "; };

  if (!std::getline(in, line)) throw ParseError(name + ": empty grammar file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Grammar g;
  {
    auto fields = split(line, ' ');
    if (fields.size() < 3 || fields[0] != "sgrammar" || fields[1] != "v1") {
      throw ParseError(where() + "bad header, expected 'sgrammar v1 lmax=<int>'");
    }
    bool saw_lmax = false;
    for (size_t k = 2; k < fields.size(); ++k) {
      std::string_view f = fields[k];
      if (f.substr(0, 5) == "lmax=") {
        g.l_max_ = static_cast<int>(parse_int(f.substr(5), "lmax"));
        saw_lmax = true;
      } else if (f.substr(0, 6) == "tauc2=") {
        g.tau_c2_ = parse_double(f.substr(6), "tauc2");
      } else {
        throw ParseError(where() + "unknown header field '" + std::string(f) + "'");
      }
    }
    if (!saw_lmax) throw ParseError(where() + "header misses lmax");
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      auto parts = split(line, '\t');
      if (line[0] == 'D') {
        if (parts.size() != 2) throw ParseError("expected one TAB in a D line");
        auto fields = split(parts[0], ' ');
        if (fields.size() != 6 || fields[0] != "D") {
          throw ParseError("expected 'D <lhs> <p_neg> <p_pos> <count_neg> <count_pos>'");
        }
        DictionaryRule d;
        d.lhs = parse_lhs(fields[1]);
        d.dist.p_neg = parse_double(fields[2], "p_neg");
        d.dist.p_pos = parse_double(fields[3], "p_pos");
        d.count_neg = parse_int(fields[4], "count_neg");
        d.count_pos = parse_int(fields[5], "count_pos");
        for (auto t : split(parts[1], ' ')) d.fragment.emplace_back(t);
        g.dict_.push_back(std::move(d));
      } else if (line[0] == 'C') {
        if (parts.size() != 2 && parts.size() != 3) {
          throw ParseError("expected one or two TABs in a C line");
        }
        auto fields = split(parts[0], ' ');
        if (fields.size() != 4 || fields[0] != "C") {
          throw ParseError("expected 'C <lhs> <type> <theta,...>'");
        }
        CombinationRule c;
        c.lhs = parse_lhs(fields[1]);
        auto type = parse_rule_type(fields[2]);
        if (!type) throw ParseError("unknown rule type '" + std::string(fields[2]) + "'");
        c.type = *type;
        for (auto t : split(fields[3], ',')) c.theta.push_back(parse_double(t, "theta"));
        std::vector<std::string> ptoks;
        for (auto t : split(parts[1], ' ')) ptoks.emplace_back(t);
        c.pattern = parse_pattern(ptoks);
        if (parts.size() == 3) {
          auto counts = split(parts[2], ',');
          const char* keys[] = {"n=", "s=", "w=", "c="};
          if (counts.size() != 4) throw ParseError("expected 'n=..,s=..,w=..,c=..'");
          for (int k = 0; k < 4; ++k) {
            if (counts[k].substr(0, 2) != keys[k]) {
              throw ParseError("expected 'n=..,s=..,w=..,c=..'");
            }
            c.type_counts[k] = parse_int(counts[k].substr(2), "type count");
          }
        }
        g.comb_.push_back(std::move(c));
      } else {
        throw ParseError("unknown line kind '" + line.substr(0, 1) + "'");
      }
    } catch (const ParseError& e) {
      throw ParseError(where() + e.what());
    }
  }

  try {
    g.build_index();
  } catch (const ConfigError& e) {
    throw ParseError(name + ": " + e.what());
  }
  return g;
}

Grammar Grammar::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open grammar file: " + path);
  return load(in, path);
}

}  // namespace sentiparse
