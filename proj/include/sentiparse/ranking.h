#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sentiparse/corpus.h"
#include "sentiparse/parser.h"
#include "sentiparse/rng.h"

namespace sentiparse {

// Dense feature indexing derived from a grammar: CombHit, DictHit, one
// CombRule feature per combination rule, one DictRule feature per
// dictionary rule. Glue, OOV, auxiliary and start applications carry no
// features.
class FeatureSpace {
 public:
  static constexpr int kCombHit = 0;
  static constexpr int kDictHit = 1;

  explicit FeatureSpace(const Grammar& g);

  int size() const { return 2 + n_comb_ + n_dict_; }
  int comb_feature(int comb_index) const { return 2 + comb_index; }
  int dict_feature(int dict_index) const { return 2 + n_comb_ + dict_index; }

  std::string name(int feature) const;        // "CombHit", "CombRule|N→not [P]", ...
  int index_of(const std::string& name) const;  // -1 when unknown

 private:
  const Grammar* grammar_;
  int n_comb_ = 0;
  int n_dict_ = 0;
  std::unordered_map<std::string, int> by_name_;
};

// sparse feature vector, entries sorted by feature index
struct FeatureVector {
  std::vector<std::pair<int, double>> items;

  void add(int feature, double value);
  double dot(const std::vector<double>& dense) const;
  bool operator==(const FeatureVector&) const = default;
};

FeatureVector extract_features(const FeatureSpace& fs, const Tree& root);

struct Weights {
  std::vector<double> psi;
  std::vector<double> gsq;  // AdaGrad accumulator

  static Weights zeros(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

  // "<feature-id> TAB <psi> TAB <G>", sorted by feature id; zero entries skipped
  void save(std::ostream& out, const FeatureSpace& fs) const;
  void save_file(const std::string& path, const FeatureSpace& fs) const;
  static Weights load(std::istream& in, const std::string& name, const FeatureSpace& fs);
  static Weights load_file(const std::string& path, const FeatureSpace& fs);
};

double score_features(const FeatureVector& f, const Weights& w);

// log sum_t exp(score(t)) with max subtraction; candidates must be non-empty
double log_partition(const std::vector<FeatureVector>& candidates, const Weights& w);
double log_partition_scores(const std::vector<double>& scores);

struct RankInstance {
  std::vector<FeatureVector> candidates;  // the beam
  std::vector<int> gold;                  // indices whose tree label matches the gold label
};

using SparseVec = std::vector<std::pair<int, double>>;  // sorted by index

struct ObjectiveResult {
  double value = 0.0;
  SparseVec grad;
};

// sum_i [A(gold_i) - A(all_i)] - lambda/2 ||psi||^2 and its gradient;
// every instance must have non-empty gold
ObjectiveResult objective_and_gradient(const std::vector<RankInstance>& instances,
                                       const Weights& w, double lambda);

// G_j += g_j^2; psi_j += alpha * g_j / sqrt(G_j), only where g_j != 0
void adagrad_step(Weights& w, const SparseVec& grad, double alpha);

RuleScores make_rule_scores(const FeatureSpace& fs, const Weights& w);

struct TrainOptions {
  int beam = 30;
  int64_t steps = 0;  // sampled instances
  double alpha = 0.1;
  double lambda = 0.01;
};

struct TrainStats {
  int64_t steps = 0;
  int64_t skipped = 0;  // instances with no candidate matching the gold label
  std::vector<std::pair<int64_t, double>> trace;
};

Weights train_ranker(const Corpus& corpus, const ParserTables& tables,
                     const FeatureSpace& fs, const TrainOptions& opt, SeededRng& rng,
                     TrainStats* stats = nullptr, std::ostream* log = nullptr);

}  // namespace sentiparse
