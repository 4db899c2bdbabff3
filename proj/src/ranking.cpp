#include "sentiparse/ranking.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "sentiparse/errors.h"
#include "sentiparse/text.h"

namespace sentiparse {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ParseError("bad " + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

FeatureSpace::FeatureSpace(const Grammar& g)
    : grammar_(&g),
      n_comb_(static_cast<int>(g.combinations().size())),
      n_dict_(static_cast<int>(g.dictionary().size())) {
  by_name_.reserve(static_cast<size_t>(size()));
  for (int f = 0; f < size(); ++f) {
    if (!by_name_.emplace(name(f), f).second) {
      throw ConfigError("duplicate feature identifier: " + name(f));
    }
  }
}

std::string FeatureSpace::name(int feature) const {
  if (feature == kCombHit) return "CombHit";
  if (feature == kDictHit) return "DictHit";
  if (feature >= 2 && feature < 2 + n_comb_) {
    return "CombRule|" + grammar_->combinations()[feature - 2].id();
  }
  if (feature >= 2 + n_comb_ && feature < size()) {
    return "DictRule|" + grammar_->dictionary()[feature - 2 - n_comb_].id();
  }
  throw InternalError("feature index out of range");
}

int FeatureSpace::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

void FeatureVector::add(int feature, double value) {
  if (value == 0.0) return;
  auto it = std::lower_bound(items.begin(), items.end(), feature,
                             [](const auto& e, int f) { return e.first < f; });
  if (it != items.end() && it->first == feature) {
    it->second += value;
    if (it->second == 0.0) items.erase(it);
  } else {
    items.insert(it, {feature, value});
  }
}

double FeatureVector::dot(const std::vector<double>& dense) const {
  double s = 0.0;
  for (const auto& [f, v] : items) s += v * dense[f];
  return s;
}

namespace {

void collect_features(const FeatureSpace& fs, const Tree& t, FeatureVector& acc) {
  if (t.kind == RuleKind::Dict) {
    acc.add(FeatureSpace::kDictHit, 1.0);
    acc.add(fs.dict_feature(t.rule), 1.0);
  } else if (t.kind == RuleKind::Comb) {
    acc.add(FeatureSpace::kCombHit, 1.0);
    acc.add(fs.comb_feature(t.rule), 1.0);
  }
  for (const auto& c : t.children) collect_features(fs, c, acc);
}

}  // namespace

FeatureVector extract_features(const FeatureSpace& fs, const Tree& root) {
  FeatureVector f;
  collect_features(fs, root, f);
  return f;
}

void Weights::save(std::ostream& out, const FeatureSpace& fs) const {
  if (static_cast<int>(psi.size()) != fs.size() || gsq.size() != psi.size()) {
    throw InternalError("weights size does not match the feature space");
  }
  std::vector<std::pair<std::string, int>> rows;
  for (int f = 0; f < fs.size(); ++f) {
    if (psi[f] == 0.0 && gsq[f] == 0.0) continue;
    rows.emplace_back(fs.name(f), f);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [nm, f] : rows) {
    out << nm << '\t' << format_double(psi[f]) << '\t' << format_double(gsq[f]) << '\n';
  }
}

void Weights::save_file(const std::string& path, const FeatureSpace& fs) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write weights file: " + path);
  save(out, fs);
  out.flush();
  if (!out) throw ConfigError("failed writing weights file: " + path);
}

Weights Weights::load(std::istream& in, const std::string& name, const FeatureSpace& fs) {
  Weights w = Weights::zeros(fs.size());
  std::unordered_set<int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto at = [&](const std::string& msg) {
      return ParseError(name + ":" + std::to_string(lineno) + ": " + msg);
    };
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 3) throw at("expected 3 tab-separated fields");
    int f = fs.index_of(fields[0]);
    if (f < 0) throw at("unknown feature '" + fields[0] + "'");
    if (!seen.insert(f).second) throw at("duplicate feature '" + fields[0] + "'");
    double psi, gsq;
    try {
      psi = parse_double(fields[1], "weight");
      gsq = parse_double(fields[2], "accumulator");
    } catch (const ParseError& e) {
      throw at(e.what());
    }
    if (gsq < 0.0) throw at("negative accumulator");
    w.psi[f] = psi;
    w.gsq[f] = gsq;
  }
  return w;
}

Weights Weights::load_file(const std::string& path, const FeatureSpace& fs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read weights file: " + path);
  return load(in, path, fs);
}

double score_features(const FeatureVector& f, const Weights& w) {
  return f.dot(w.psi);
}

double log_partition_scores(const std::vector<double>& scores) {
  if (scores.empty()) throw InternalError("log partition of an empty candidate set");
  double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

double log_partition(const std::vector<FeatureVector>& candidates, const Weights& w) {
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& f : candidates) scores.push_back(score_features(f, w));
  return log_partition_scores(scores);
}

ObjectiveResult objective_and_gradient(const std::vector<RankInstance>& instances,
                                       const Weights& w, double lambda) {
  const size_t n = w.psi.size();
  std::vector<double> g(n, 0.0);
  double value = 0.0;
  std::vector<double> scores, gold_scores;
  std::vector<char> is_gold;
  for (const auto& inst : instances) {
    if (inst.candidates.empty()) throw InternalError("rank instance with no candidates");
    if (inst.gold.empty()) throw InternalError("rank instance with no gold candidates");
    const size_t m = inst.candidates.size();
    scores.clear();
    for (const auto& f : inst.candidates) scores.push_back(f.dot(w.psi));
    gold_scores.clear();
    is_gold.assign(m, 0);
    for (int c : inst.gold) {
      if (c < 0 || c >= static_cast<int>(m)) {
        throw InternalError("gold candidate index out of range");
      }
      if (is_gold[c]) throw InternalError("duplicate gold candidate index");
      is_gold[c] = 1;
      gold_scores.push_back(scores[c]);
    }
    const double logz_all = log_partition_scores(scores);
    const double logz_gold = log_partition_scores(gold_scores);
    value += logz_gold - logz_all;
    // pairing the two expectations per candidate keeps the gradient exactly
    // zero when every candidate is gold, instead of leaving rounding noise
    // that AdaGrad would blow up into a full-size step
    for (size_t c = 0; c < m; ++c) {
      double wc = -std::exp(scores[c] - logz_all);
      if (is_gold[c]) wc += std::exp(scores[c] - logz_gold);
      if (wc == 0.0) continue;
      for (const auto& [f, v] : inst.candidates[c].items) g[f] += wc * v;
    }
  }
  double norm_sq = 0.0;
  for (size_t j = 0; j < n; ++j) {
    norm_sq += w.psi[j] * w.psi[j];
    g[j] -= lambda * w.psi[j];
  }
  value -= 0.5 * lambda * norm_sq;

  ObjectiveResult out;
  out.value = value;
  for (size_t j = 0; j < n; ++j) {
    if (g[j] != 0.0) out.grad.emplace_back(static_cast<int>(j), g[j]);
  }
  return out;
}

void adagrad_step(Weights& w, const SparseVec& grad, double alpha) {
  for (const auto& [j, gj] : grad) {
    if (gj == 0.0) continue;
    w.gsq[j] += gj * gj;
    w.psi[j] += alpha * gj / std::sqrt(w.gsq[j]);
  }
}

RuleScores make_rule_scores(const FeatureSpace& fs, const Weights& w) {
  if (static_cast<int>(w.psi.size()) != fs.size()) {
    throw InternalError("weights size does not match the feature space");
  }
  RuleScores rs;
  int n_comb = fs.dict_feature(0) - fs.comb_feature(0);
  int n_dict = fs.size() - 2 - n_comb;
  rs.comb.resize(n_comb);
  rs.dict.resize(n_dict);
  for (int i = 0; i < n_comb; ++i) {
    rs.comb[i] = w.psi[FeatureSpace::kCombHit] + w.psi[fs.comb_feature(i)];
  }
  for (int i = 0; i < n_dict; ++i) {
    rs.dict[i] = w.psi[FeatureSpace::kDictHit] + w.psi[fs.dict_feature(i)];
  }
  return rs;
}

Weights train_ranker(const Corpus& corpus, const ParserTables& tables,
                     const FeatureSpace& fs, const TrainOptions& opt, SeededRng& rng,
                     TrainStats* stats, std::ostream* log) {
  if (opt.steps < 0) throw ConfigError("ranker: negative step count");
  if (opt.beam < 1) throw ConfigError("ranker: beam width must be at least 1");
  if (!(opt.alpha > 0.0) || !std::isfinite(opt.alpha)) {
    throw ConfigError("ranker: learning rate must be positive");
  }
  if (opt.lambda < 0.0 || !std::isfinite(opt.lambda)) {
    throw ConfigError("ranker: regularizer must be non-negative");
  }
  if (stats) *stats = TrainStats{};
  Weights w = Weights::zeros(fs.size());
  if (opt.steps == 0) return w;
  if (corpus.size() == 0) throw ConfigError("ranker: empty corpus");

  DecodeOptions dopt;
  dopt.k = opt.beam;
  const int64_t log_every = std::max<int64_t>(1, opt.steps / 10);
  int64_t skipped = 0;
  for (int64_t step = 0; step < opt.steps; ++step) {
    const LabeledSentence& sent = corpus.sentences[rng.uniform_index(corpus.size())];
    RuleScores rs = make_rule_scores(fs, w);
    DecodeResult res = decode(tables, rs, sent.tokens, dopt);

    RankInstance inst;
    for (size_t c = 0; c < res.k_best.size(); ++c) {
      auto lab = tree_label(res.k_best[c]);
      if (lab && *lab == sent.label) inst.gold.push_back(static_cast<int>(c));
    }
    double objective = 0.0;
    if (inst.gold.empty()) {
      ++skipped;
    } else {
      inst.candidates.reserve(res.k_best.size());
      for (const Tree& t : res.k_best) inst.candidates.push_back(extract_features(fs, t));
      std::vector<RankInstance> one;
      one.push_back(std::move(inst));
      ObjectiveResult obj = objective_and_gradient(one, w, opt.lambda);
      adagrad_step(w, obj.grad, opt.alpha);
      objective = obj.value;
      if (stats) stats->trace.emplace_back(step + 1, objective);
    }
    if (log && ((step + 1) % log_every == 0 || step + 1 == opt.steps)) {
      *log << "[ranker] step " << (step + 1) << "/" << opt.steps
           << " objective=" << objective << " skipped=" << skipped << "\n";
    }
  }
  if (stats) {
    stats->steps = opt.steps;
    stats->skipped = skipped;
  }
  return w;
}

}  // namespace sentiparse
